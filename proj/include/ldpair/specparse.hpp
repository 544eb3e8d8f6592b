#pragma once

// Text forms used by the CLI and config files: compact kernel specs
// ("gaussian:theta=0.5", "loggas:beta=2;v=0,0,1", "custom:square_diff"),
// event strings ("marginal_mean>=0.5"), functional component specs
// ("clampx:-1,1"), and comma lists. Parse errors throw invalid_argument;
// the CLI maps those to exit code 2.

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "experiment.hpp"
#include "kernel.hpp"
#include "varadhan.hpp"

namespace ldpair {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& tok : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number in list: '" + tok + "'");
    }
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) {
    if (v != std::floor(v)) throw std::invalid_argument("expected integers in list: " + s);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Polynomial c0 + c1 u + c2 u^2 + ... from its coefficient list.
inline Univariate make_poly(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("polynomial needs coefficients");
  return [c = std::move(coeffs)](double u) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
    return acc;
  };
}

namespace detail {

inline std::map<std::string, std::string> parse_params(const std::string& s) {
  std::map<std::string, std::string> kv;
  if (s.empty()) return kv;
  for (const std::string& item : split(s, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("kernel spec: expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

}  // namespace detail

// SPEC := kind[:key=value(;key=value)*]. Values that are lists use commas,
// hence the semicolon separator between parameters.
inline InteractionKernel parse_kernel(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "gaussian") {
    const auto kv = detail::parse_params(rest);
    const auto it = kv.find("theta");
    if (it == kv.end()) throw std::invalid_argument("gaussian kernel needs theta=");
    InteractionKernel k = gaussian_kernel(std::stod(it->second));
    k.spec = spec;
    if (auto b = kv.find("box"); b != kv.end()) {
      const auto v = parse_double_list(b->second);
      if (v.size() != 4) throw std::invalid_argument("box= needs xlo,xhi,ylo,yhi");
      k.search_box = {v[0], v[1], v[2], v[3]};
    }
    return k;
  }
  if (kind == "loggas") {
    const auto kv = detail::parse_params(rest);
    const auto it = kv.find("beta");
    if (it == kv.end()) throw std::invalid_argument("loggas kernel needs beta=");
    const double beta = std::stod(it->second);
    Univariate V = [](double u) { return u * u; };
    Univariate W = V;
    if (auto v = kv.find("v"); v != kv.end()) V = make_poly(parse_double_list(v->second));
    if (auto w = kv.find("w"); w != kv.end()) W = make_poly(parse_double_list(w->second));
    InteractionKernel k = loggas_kernel(beta, V, W, spec);
    if (auto b = kv.find("box"); b != kv.end()) {
      const auto v = parse_double_list(b->second);
      if (v.size() != 4) throw std::invalid_argument("box= needs xlo,xhi,ylo,yhi");
      k.search_box = {v[0], v[1], v[2], v[3]};
    }
    return k;
  }
  if (kind == "custom") {
    // Named kernels only; arbitrary formulas are out of scope.
    if (rest == "square_diff")
      return custom_kernel([](double x, double y) { return (x - y) * (x - y); }, 0.0,
                           {-10.0, 10.0, -10.0, 10.0}, spec);
    throw std::invalid_argument("unknown custom kernel '" + rest +
                                "' (available: square_diff)");
  }
  throw std::invalid_argument("unknown kernel kind '" + kind +
                              "' (expected gaussian, loggas, or custom)");
}

inline EventSpec parse_event(const std::string& s) {
  EventSpec ev;
  std::size_t op = s.find(">=");
  if (op != std::string::npos) {
    ev.direction = Direction::geq;
  } else {
    op = s.find("<=");
    if (op == std::string::npos)
      throw std::invalid_argument("event spec needs '>=' or '<=': " + s);
    ev.direction = Direction::leq;
  }
  const std::string stat = s.substr(0, op);
  if (stat == "marginal_mean") ev.statistic = Statistic::marginal_mean;
  else if (stat == "average_mean") ev.statistic = Statistic::average_mean;
  else if (stat == "marginal_second_moment")
    ev.statistic = Statistic::marginal_second_moment;
  else
    throw std::invalid_argument("unknown event statistic '" + stat + "'");
  try {
    ev.a = std::stod(s.substr(op + 2));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad event threshold in: " + s);
  }
  return ev;
}

inline const char* statistic_name(Statistic s) {
  switch (s) {
    case Statistic::marginal_mean: return "marginal_mean";
    case Statistic::average_mean: return "average_mean";
    case Statistic::marginal_second_moment: return "marginal_second_moment";
  }
  return "?";
}

// Component specs: zero | const:c | clampx:lo,hi | clampy:lo,hi |
// clampxy:lo,hi | bump:cx,cy,s,amp.
inline FunctionalComponent parse_component(const std::string& s) {
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  auto need = [&](std::size_t n) {
    const auto v = parse_double_list(rest);
    if (v.size() != n)
      throw std::invalid_argument("functional '" + name + "' needs " +
                                  std::to_string(n) + " parameters");
    return v;
  };
  if (name == "zero") return fc_constant(0.0);
  if (name == "const") return fc_constant(need(1)[0]);
  if (name == "clampx") { const auto v = need(2); return fc_clamp_x(v[0], v[1]); }
  if (name == "clampy") { const auto v = need(2); return fc_clamp_y(v[0], v[1]); }
  if (name == "clampxy") { const auto v = need(2); return fc_clamp_product(v[0], v[1]); }
  if (name == "bump") { const auto v = need(4); return fc_gauss_bump(v[0], v[1], v[2], v[3]); }
  throw std::invalid_argument("unknown functional component '" + name + "'");
}

inline MinFunctional parse_functional(const std::vector<std::string>& specs) {
  std::vector<FunctionalComponent> comps;
  for (const std::string& s : specs) comps.push_back(parse_component(s));
  return min_functional(std::move(comps));
}

}  // namespace ldpair
