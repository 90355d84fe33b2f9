#include "ctmc/tf_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace ctmc {

namespace {

constexpr char kMagic[8] = {'C', 'T', 'M', 'C', 'T', 'F', '0', '1'};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ConfigError("truncated transition-function file");
  return v;
}

}  // namespace

void write_csv(const TransitionFunction& fn, std::ostream& out) {
  out << "# ctmc-tf v1 N=" << fn.max_state()
      << " T=" << fmt17(fn.grid().horizon) << " h=" << fmt17(fn.grid().step)
      << " solver=" << fn.solver_id() << " tol=" << fmt17(fn.tolerance())
      << "\n";
  out << "t,i,j,value\n";
  const State size = fn.size();
  for (std::size_t m = 0; m < fn.grid().points; ++m) {
    const std::string t = fmt17(fn.grid().time(m));
    for (State i = 0; i < size; ++i)
      for (State j = 0; j < size; ++j)
        out << t << ',' << i << ',' << j << ',' << fmt17(fn(m, i, j)) << "\n";
  }
}

TransitionFunction read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty transition-function file");
  unsigned long n = 0;
  double horizon = 0, step = 0, tol = 0;
  char solver[64] = {0};
  if (std::sscanf(line.c_str(), "# ctmc-tf v1 N=%lu T=%lf h=%lf solver=%63s tol=%lf",
                  &n, &horizon, &step, solver, &tol) != 5)
    throw ConfigError("bad transition-function header: " + line);
  // "solver=foo" leaves "tol=..." glued when solver has no spaces; re-split.
  std::string solver_id(solver);
  if (!std::getline(in, line) || line != "t,i,j,value")
    throw ConfigError("missing column header");
  TransitionFunction fn(static_cast<State>(n), TimeGrid(horizon, step),
                        solver_id, tol);
  const State size = fn.size();
  const std::size_t expect =
      fn.grid().points * static_cast<std::size_t>(size) * size;
  std::size_t seen = 0;
  double t, value;
  unsigned long i, j;
  std::size_t m = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (std::sscanf(line.c_str(), "%lf,%lu,%lu,%lf", &t, &i, &j, &value) != 4)
      throw ConfigError("bad data line: " + line);
    m = seen / (static_cast<std::size_t>(size) * size);
    if (m >= fn.grid().points || i > n || j > n)
      throw ConfigError("data outside the declared grid/window");
    fn.at(m, static_cast<State>(i), static_cast<State>(j)) = value;
    ++seen;
  }
  if (seen != expect)
    throw ConfigError("expected " + std::to_string(expect) + " values, got " +
                      std::to_string(seen));
  return fn;
}

void write_binary(const TransitionFunction& fn, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, fn.max_state());
  put<std::uint64_t>(out, fn.grid().points);
  put<double>(out, fn.grid().horizon);
  put<double>(out, fn.grid().step);
  char solver[16] = {0};
  std::strncpy(solver, fn.solver_id().c_str(), sizeof(solver) - 1);
  out.write(solver, sizeof solver);
  put<double>(out, fn.tolerance());
  out.write(reinterpret_cast<const char*>(fn.raw().data()),
            static_cast<std::streamsize>(fn.raw().size() * sizeof(double)));
}

TransitionFunction read_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ConfigError("not a ctmc transition-function binary file");
  const auto n = get<std::uint32_t>(in);
  const auto points = get<std::uint64_t>(in);
  const double horizon = get<double>(in);
  const double step = get<double>(in);
  char solver[16];
  in.read(solver, sizeof solver);
  solver[15] = 0;
  const double tol = get<double>(in);
  TransitionFunction fn(static_cast<State>(n), TimeGrid(horizon, step), solver,
                        tol);
  if (fn.grid().points != points)
    throw ConfigError("inconsistent grid header");
  in.read(reinterpret_cast<char*>(fn.raw().data()),
          static_cast<std::streamsize>(fn.raw().size() * sizeof(double)));
  if (!in) throw ConfigError("truncated transition-function payload");
  return fn;
}

void save_transition_function(const TransitionFunction& fn,
                              const std::string& path) {
  const bool binary = path.size() > 4 && path.substr(path.size() - 4) == ".bin";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot write " + path);
  if (binary)
    write_binary(fn, out);
  else
    write_csv(fn, out);
}

TransitionFunction load_transition_function(const std::string& path) {
  const bool binary = path.size() > 4 && path.substr(path.size() - 4) == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ConfigError("cannot read " + path);
  return binary ? read_binary(in) : read_csv(in);
}

}  // namespace ctmc
