#include "bqlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "bqlab/errors.hpp"

namespace bqlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: value of '" + key + "' is not a number: " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: value of '" + key + "' is not a boolean: " + v);
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::map<int, SolitonParams> solitons;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "p") {
      cfg.p = to_double(key, value);
    } else if (key == "grid.half_length") {
      cfg.grid_half_length = to_double(key, value);
    } else if (key == "grid.n") {
      cfg.grid_n = static_cast<int>(to_double(key, value));
    } else if (key == "evolve.dt") {
      cfg.dt = to_double(key, value);
    } else if (key == "evolve.dealias") {
      cfg.dealias = to_bool(key, value);
    } else if (key == "construction.t0") {
      cfg.t0 = to_double(key, value);
    } else if (key == "construction.final_times") {
      std::istringstream vs(value);
      double t;
      cfg.final_times.clear();
      while (vs >> t) cfg.final_times.push_back(t);
      if (cfg.final_times.empty())
        throw ConfigError("config: construction.final_times holds no times");
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned>(to_double(key, value));
    } else if (key.rfind("soliton", 0) == 0) {
      const auto dot = key.find('.');
      if (dot == std::string::npos)
        throw ConfigError("config: malformed soliton key: " + key);
      int idx = 0;
      try {
        idx = std::stoi(key.substr(7, dot - 7));
      } catch (const std::exception&) {
        throw ConfigError("config: malformed soliton index in: " + key);
      }
      const std::string field = key.substr(dot + 1);
      if (field == "omega")
        solitons[idx].omega = to_double(key, value);
      else if (field == "x0")
        solitons[idx].x0 = to_double(key, value);
      else
        throw ConfigError("config: unknown soliton field: " + key);
    } else {
      throw ConfigError("config: unknown key: " + key);
    }
  }
  for (auto& [idx, s] : solitons) {
    s.p = cfg.p;
    cfg.solitons.push_back(s);
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str());
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "p = " << p << "\n";
  for (size_t j = 0; j < solitons.size(); ++j) {
    os << "soliton" << j + 1 << ".omega = " << solitons[j].omega << "\n";
    os << "soliton" << j + 1 << ".x0 = " << solitons[j].x0 << "\n";
  }
  if (grid_half_length) os << "grid.half_length = " << *grid_half_length << "\n";
  if (grid_n) os << "grid.n = " << *grid_n << "\n";
  if (dt) os << "evolve.dt = " << *dt << "\n";
  os << "evolve.dealias = " << (dealias ? "true" : "false") << "\n";
  os << "construction.t0 = " << t0 << "\n";
  if (!final_times.empty()) {
    os << "construction.final_times =";
    for (double t : final_times) os << ' ' << t;
    os << "\n";
  }
  if (!output_dir.empty()) os << "output.dir = " << output_dir << "\n";
  os << "seed = " << seed << "\n";
  return os.str();
}

SolitonFamily RunConfig::family() const {
  if (solitons.empty())
    throw ConfigError("config: no solitons given (need soliton<i>.omega)");
  for (const auto& s : solitons) {
    if (!(std::abs(s.omega) < 1.0))
      throw ConfigError("config: soliton speed violates |omega| < 1: omega=" +
                        std::to_string(s.omega));
  }
  try {
    return SolitonFamily::make(p, solitons);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string output_root() {
  const char* env = std::getenv("BQLAB_OUTPUT_ROOT");
  return env && *env ? std::string(env) : std::string(".");
}

}  // namespace bqlab
