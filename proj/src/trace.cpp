#include "habcov/trace.hpp"

#include <fstream>
#include <sstream>

namespace habcov {

namespace {

constexpr const char* kMagic = "# habcov-trace v1";

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw TraceParseError("trace line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

double EpisodeTrace::episode_return() const {
  double sum = 0.0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

void EpisodeTrace::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for write: " + path);
  out << kMagic << '\n';
  for (const auto& [k, v] : config_kv) out << "# config " << k << '=' << v << '\n';
  out << "# seed " << seed << '\n';
  out << "# agents " << n_agents << '\n';
  for (const auto& s : init) {
    out << "# init " << s.agent_id << ' ' << fmt(s.x_km) << ' ' << fmt(s.y_km)
        << ' ' << fmt(s.altitude_m) << '\n';
  }
  for (const auto& st : steps) {
    out << st.t;
    for (int i = 0; i < n_agents; ++i) {
      out << ' ' << i << ' ' << fmt(st.x_km[i]) << ' ' << fmt(st.y_km[i]) << ' '
          << fmt(st.alt_m[i]) << ' ' << st.action[i];
    }
    out << " | " << fmt(st.reward) << ' ' << fmt(st.coverage_ratio) << ' '
        << fmt(st.separation) << '\n';
  }
  out << "# end " << steps.size() << ' ' << (truncated ? 1 : 0) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void EpisodeTrace::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace csv for write: " + path);
  out << "t,agent_id,x_km,y_km,alt_m,action,reward,coverage_ratio,separation\n";
  for (const auto& st : steps) {
    for (int i = 0; i < n_agents; ++i) {
      out << st.t << ',' << i << ',' << fmt(st.x_km[i]) << ',' << fmt(st.y_km[i])
          << ',' << fmt(st.alt_m[i]) << ',' << st.action[i] << ','
          << fmt(st.reward) << ',' << fmt(st.coverage_ratio) << ','
          << fmt(st.separation) << '\n';
    }
  }
}

EpisodeTrace EpisodeTrace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceParseError("cannot open trace file: " + path);
  EpisodeTrace tr;
  std::string line;
  int line_no = 0;
  bool saw_magic = false, saw_end = false;
  std::size_t declared_steps = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kMagic) fail(line_no, "bad magic (expected '" + std::string(kMagic) + "')");
      saw_magic = true;
      continue;
    }
    if (line[0] == '#') {
      std::istringstream is(line);
      std::string hash, word;
      is >> hash >> word;
      if (word == "config") {
        std::string rest;
        std::getline(is, rest);
        std::size_t eq = rest.find('=');
        if (eq == std::string::npos) fail(line_no, "config line missing '='");
        std::string key = rest.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        tr.config_kv[key] = rest.substr(eq + 1);
      } else if (word == "seed") {
        if (!(is >> tr.seed)) fail(line_no, "bad seed");
      } else if (word == "agents") {
        if (!(is >> tr.n_agents) || tr.n_agents <= 0) fail(line_no, "bad agent count");
      } else if (word == "init") {
        AgentState s;
        if (!(is >> s.agent_id >> s.x_km >> s.y_km >> s.altitude_m)) {
          fail(line_no, "bad init record");
        }
        tr.init.push_back(s);
      } else if (word == "end") {
        int trunc = 0;
        if (!(is >> declared_steps >> trunc)) fail(line_no, "bad end record");
        tr.truncated = trunc != 0;
        saw_end = true;
      } else {
        fail(line_no, "unknown header '" + word + "'");
      }
      continue;
    }
    if (tr.n_agents <= 0) fail(line_no, "step record before '# agents' header");
    TraceStep st;
    std::istringstream is(line);
    if (!(is >> st.t)) fail(line_no, "bad step index");
    st.x_km.resize(tr.n_agents);
    st.y_km.resize(tr.n_agents);
    st.alt_m.resize(tr.n_agents);
    st.action.resize(tr.n_agents);
    for (int i = 0; i < tr.n_agents; ++i) {
      int id;
      if (!(is >> id >> st.x_km[i] >> st.y_km[i] >> st.alt_m[i] >> st.action[i])) {
        fail(line_no, "bad agent record for agent " + std::to_string(i));
      }
      if (id != i) fail(line_no, "agent ids out of order");
      if (st.action[i] < 0 || st.action[i] >= kNumActions) {
        fail(line_no, "invalid action " + std::to_string(st.action[i]));
      }
    }
    std::string bar;
    if (!(is >> bar) || bar != "|") fail(line_no, "missing '|' metrics separator");
    if (!(is >> st.reward >> st.coverage_ratio >> st.separation)) {
      fail(line_no, "bad metrics block");
    }
    tr.steps.push_back(std::move(st));
  }
  if (!saw_magic) throw TraceParseError("trace line 1: empty file");
  if (!saw_end) throw TraceParseError("trace: missing '# end' footer (truncated file)");
  if (declared_steps != tr.steps.size()) {
    throw TraceParseError("trace: footer declares " + std::to_string(declared_steps) +
                          " steps but " + std::to_string(tr.steps.size()) + " present");
  }
  if (static_cast<int>(tr.init.size()) != tr.n_agents) {
    throw TraceParseError("trace: init records do not match agent count");
  }
  return tr;
}

}  // namespace habcov
