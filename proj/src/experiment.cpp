// Copyright 2026 The homogkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "homog/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "homog/coefficients.hpp"
#include "homog/rates.hpp"

#ifndef HOMOGKIT_VERSION
#define HOMOGKIT_VERSION "0.0.0"
#endif

namespace homog {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s = "invalid configuration:";
  for (const auto& m : v) s += "\n  " + m;
  return s;
}

const std::set<std::string> kSubcommands{"cell", "homogenize", "solve", "correctors", "green", "rates", "validate"};

/// 1-based line of the first occurrence of "key" in the text, 0 if absent.
int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

struct Collector {
  const std::string& text;
  std::vector<std::pair<int, std::string>> found;
  void add(const std::string& key, const std::string& msg) {
    const int line = line_of(text, key);
    found.emplace_back(line > 0 ? line : std::numeric_limits<int>::max(),
                       (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + key + ": " + msg);
  }
  /// Messages ordered by line; keys without a line come last.
  std::vector<std::string> sorted() {
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (auto& f : found) out.push_back(std::move(f.second));
    return out;
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Number or a "p/q" fraction string.
std::optional<double> as_real(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) return std::nullopt;
  const std::string s = j.get<std::string>();
  const auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      return used == s.size() ? std::optional<double>(v) : std::nullopt;
    }
    const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    std::size_t ua = 0, ub = 0;
    const double p = std::stod(a, &ua), q = std::stod(b, &ub);
    if (ua != a.size() || ub != b.size() || q == 0.0) return std::nullopt;
    return p / q;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool is_dyadic(double eps) {
  int e = 0;
  return eps > 0.0 && std::isfinite(eps) && std::frexp(eps, &e) == 0.5;
}

std::vector<double> point_of(const nlohmann::json& j, bool& ok) {
  std::vector<double> v;
  ok = j.is_array();
  if (!ok) return v;
  for (const auto& e : j) {
    if (!e.is_number()) {
      ok = false;
      return {};
    }
    v.push_back(e.get<double>());
  }
  return v;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations) : Error(ErrorKind::Config, join(violations)), violations_(std::move(violations)) {}

const char* toolkit_version() { return HOMOGKIT_VERSION; }

ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError({"syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"line 1: configuration must be a JSON object"});

  ExperimentConfig c;
  Collector err{text, {}};
  bool eps_ok = true, family_ok = true;

  auto integer = [&](const std::string& key, const nlohmann::json& v, long long lo, long long hi, auto& dst) {
    if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())) {
      err.add(key, "must be an integer");
      return false;
    }
    const long long x = v.is_number_integer() ? v.get<long long>() : static_cast<long long>(v.get<double>());
    if (x < lo || x > hi) {
      err.add(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(x));
      return false;
    }
    dst = static_cast<std::remove_reference_t<decltype(dst)>>(x);
    return true;
  };
  auto boolean = [&](const std::string& key, const nlohmann::json& v, bool& dst) {
    if (!v.is_boolean()) return err.add(key, "must be true or false");
    dst = v.get<bool>();
  };
  auto string = [&](const std::string& key, const nlohmann::json& v, std::string& dst) {
    if (!v.is_string()) return err.add(key, "must be a string");
    dst = v.get<std::string>();
  };
  auto point = [&](const std::string& key, const nlohmann::json& v, std::vector<double>& dst) {
    bool ok = false;
    dst = point_of(v, ok);
    if (!ok) err.add(key, "must be an array of numbers");
  };

  const std::map<std::string, std::function<void(const nlohmann::json&)>> handlers{
      {"subcommand",
       [&](const nlohmann::json& v) {
         string("subcommand", v, c.subcommand);
         if (v.is_string() && !kSubcommands.count(c.subcommand)) err.add("subcommand", "unknown subcommand '" + c.subcommand + "'");
       }},
      {"family",
       [&](const nlohmann::json& v) {
         if (v.is_string()) {
           c.family = v.get<std::string>();
         } else if (v.is_object()) {
           for (const auto& [k, e] : v.items()) {
             if (k == "name") {
               if (e.is_string())
                 c.family = e.get<std::string>();
               else
                 err.add("name", "must be a string");
             } else if (k == "params") {
               if (e.is_object())
                 c.params = e;
               else
                 err.add("params", "must be an object");
             } else {
               err.add(k, "unknown key in family");
             }
           }
         } else {
           err.add("family", "must be a name or an object {name, params}");
           family_ok = false;
         }
       }},
      {"n", [&](const nlohmann::json& v) { integer("n", v, 4, 4096, c.n); }},
      {"eps",
       [&](const nlohmann::json& v) {
         c.eps.clear();
         const nlohmann::json arr = v.is_array() ? v : nlohmann::json::array({v});
         for (const auto& e : arr) {
           const auto r = as_real(e);
           if (!r || !(*r > 0.0) || !std::isfinite(*r)) {
             err.add("eps", "entries must be positive numbers or p/q fractions, got " + e.dump());
             eps_ok = false;
           } else {
             c.eps.push_back(*r);
           }
         }
         if (arr.empty()) {
           err.add("eps", "must not be empty");
           eps_ok = false;
         }
       }},
      {"tol",
       [&](const nlohmann::json& v) {
         if (!v.is_number() || !(v.get<double>() > 0.0) || v.get<double>() > 1e-2)
           err.add("tol", "must be a number in (0, 1e-2]");
         else
           c.tol = v.get<double>();
       }},
      {"lambda",
       [&](const nlohmann::json& v) {
         if (v.is_string() && v.get<std::string>() == "default") {
           c.lambda_default = true;
         } else if (v.is_number() && std::isfinite(v.get<double>())) {
           c.lambda_default = false;
           c.lambda = v.get<double>();
         } else {
           err.add("lambda", "must be \"default\" or a number");
         }
       }},
      {"homogenized", [&](const nlohmann::json& v) { boolean("homogenized", v, c.homogenized); }},
      {"cell_n", [&](const nlohmann::json& v) { integer("cell_n", v, 0, 4096, c.cell_n); }},
      {"points_per_period",
       [&](const nlohmann::json& v) {
         if (!v.is_number() || v.get<double>() < 2.0)
           err.add("points_per_period", "must be a number >= 2");
         else
           c.points_per_period = v.get<double>();
       }},
      {"fixed_cells", [&](const nlohmann::json& v) { integer("fixed_cells", v, 0, 8192, c.fixed_cells); }},
      {"correctors", [&](const nlohmann::json& v) { boolean("correctors", v, c.correctors); }},
      {"load",
       [&](const nlohmann::json& v) {
         string("load", v, c.load);
         if (v.is_string() && c.load != "one" && c.load != "sine" && c.load != "bump") err.add("load", "must be one, sine or bump");
       }},
      {"boundary",
       [&](const nlohmann::json& v) {
         string("boundary", v, c.boundary);
         if (v.is_string() && c.boundary != "zero" && c.boundary != "affine") err.add("boundary", "must be zero or affine");
       }},
      {"guard_override", [&](const nlohmann::json& v) { boolean("guard_override", v, c.guard_override); }},
      {"probes",
       [&](const nlohmann::json& v) {
         if (!v.is_array()) return err.add("probes", "must be an array of probe names");
         c.probes.clear();
         for (const auto& e : v) {
           if (!e.is_string()) {
             err.add("probes", "entries must be strings");
             continue;
           }
           try {
             parse_probe(e.get<std::string>());
             c.probes.push_back(e.get<std::string>());
           } catch (const Error& ex) {
             err.add("probes", ex.what());
           }
         }
       }},
      {"svg", [&](const nlohmann::json& v) { boolean("svg", v, c.svg); }},
      {"y", [&](const nlohmann::json& v) { point("y", v, c.y); }},
      {"x", [&](const nlohmann::json& v) { point("x", v, c.x); }},
      {"rho",
       [&](const nlohmann::json& v) {
         if (!v.is_number() || v.get<double>() < 0.0)
           err.add("rho", "must be a nonnegative number");
         else
           c.rho = v.get<double>();
       }},
      {"output",
       [&](const nlohmann::json& v) {
         if (v.is_null()) return;
         std::string s;
         string("output", v, s);
         if (v.is_string()) c.output = s;
       }},
      {"seed",
       [&](const nlohmann::json& v) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
           err.add("seed", "must be a nonnegative integer");
         else
           c.seed = v.get<std::uint64_t>();
       }},
      {"threads", [&](const nlohmann::json& v) { integer("threads", v, 1, 256, c.threads); }},
      {"checks",
       [&](const nlohmann::json& v) {
         if (!v.is_array()) return err.add("checks", "must be an array of {metric, min, max}");
         for (const auto& e : v) {
           if (!e.is_object()) {
             err.add("checks", "entries must be objects");
             continue;
           }
           Check ch;
           bool good = true;
           for (const auto& [k, f] : e.items()) {
             if (k == "metric" && f.is_string()) {
               ch.metric = f.get<std::string>();
             } else if ((k == "min" || k == "max") && f.is_number()) {
               (k == "min" ? ch.min : ch.max) = f.get<double>();
             } else {
               err.add(k, "unknown key or wrong type in check");
               good = false;
             }
           }
           if (ch.metric.empty() || ch.metric[0] != '/') {
             err.add("metric", "check metric must be a JSON pointer such as /rates/l2/slope");
             good = false;
           } else {
             try {
               nlohmann::json::json_pointer p(ch.metric);
               (void)p;
             } catch (const nlohmann::json::exception&) {
               err.add("metric", "malformed JSON pointer '" + ch.metric + "'");
               good = false;
             }
           }
           if (!ch.min && !ch.max) {
             err.add("checks", "check on '" + ch.metric + "' needs min or max");
             good = false;
           }
           if (good) c.checks.push_back(ch);
         }
       }},
  };

  for (const auto& [key, value] : doc.items()) {
    const auto h = handlers.find(key);
    if (h == handlers.end())
      err.add(key, "unknown key");
    else
      h->second(value);
  }

  // Cross-field guards.
  int d = 0;
  if (family_ok) {
    try {
      d = builtin_family(c.family, c.params).d;
    } catch (const Error& e) {
      err.add("family", e.what());
    }
  }
  const bool sweep = c.subcommand == "rates";
  if (eps_ok) {
    if (!sweep && c.eps.size() != 1) err.add("eps", "needs exactly one value for " + (c.subcommand.empty() ? "this run" : c.subcommand));
    if (sweep) {
      bool dyadic = true;
      for (double e : c.eps)
        if (!is_dyadic(e)) {
          err.add("eps", "eps must be dyadic (dyadic guard), got " + fmt(e));
          dyadic = false;
        }
      for (std::size_t i = 1; i < c.eps.size(); ++i)
        if (!(c.eps[i] < c.eps[i - 1])) {
          err.add("eps", "must be strictly decreasing");
          dyadic = false;
          break;
        }
      if (dyadic) {
        SweepConfig sc;
        sc.eps = c.eps;
        sc.points_per_period = c.points_per_period;
        sc.fixed_cells = c.fixed_cells;
        try {
          validate_sweep(sc);
        } catch (const Error& e) {
          err.add("eps", e.what());
        }
      }
    }
    const bool box = c.subcommand == "solve" || c.subcommand == "correctors" || c.subcommand == "green";
    if (box && !c.homogenized && c.family != "constant" && !c.guard_override && c.eps[0] * c.n < 16.0 - 1e-9)
      err.add("n", "resolution guard: h = 1/" + std::to_string(c.n) + " exceeds eps/16 for eps = " + fmt(c.eps[0]) +
                       " (set guard_override to accept)");
  }
  if (d > 0) {
    for (const auto& [name, pt] : {std::pair<std::string, const std::vector<double>*>{"y", &c.y}, {"x", &c.x}}) {
      if (pt->empty()) continue;
      if (static_cast<int>(pt->size()) != d) {
        err.add(name, "needs " + std::to_string(d) + " coordinates");
        continue;
      }
      for (double v : *pt)
        if (!(v > 0.0 && v < 1.0)) {
          err.add(name, "coordinates must lie strictly inside (0, 1)");
          break;
        }
    }
  }
  if (!err.found.empty()) throw ConfigError(err.sorted());
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& ch : c.checks) {
    nlohmann::json e{{"metric", ch.metric}};
    if (ch.min) e["min"] = *ch.min;
    if (ch.max) e["max"] = *ch.max;
    checks.push_back(e);
  }
  nlohmann::json j{{"family", {{"name", c.family}, {"params", c.params}}},
                   {"n", c.n},
                   {"eps", c.eps},
                   {"tol", c.tol},
                   {"homogenized", c.homogenized},
                   {"cell_n", c.cell_n},
                   {"points_per_period", c.points_per_period},
                   {"fixed_cells", c.fixed_cells},
                   {"correctors", c.correctors},
                   {"load", c.load},
                   {"boundary", c.boundary},
                   {"guard_override", c.guard_override},
                   {"probes", c.probes},
                   {"svg", c.svg},
                   {"y", c.y},
                   {"x", c.x},
                   {"rho", c.rho},
                   {"seed", c.seed},
                   {"threads", c.threads},
                   {"checks", checks}};
  if (!c.subcommand.empty()) j["subcommand"] = c.subcommand;
  j["lambda"] = c.lambda_default ? nlohmann::json("default") : nlohmann::json(c.lambda);
  if (c.output) j["output"] = *c.output;
  return j;
}

std::string serialize_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) == 1, ErrorKind::Io, "SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace homog
