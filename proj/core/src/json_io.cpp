// ---------------------------------------------------------------------------
// json_io.cpp
//
// Wire formats for all public value types.  Parsing is strict: unknown
// shapes, missing keys, and mis-sized data arrays are reported with the
// JSON path of the offending key.
// ---------------------------------------------------------------------------

#include "rhkit/json_io.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rhkit/rational.hpp"

namespace rhkit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("json: " + path + ": " + what);
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw std::invalid_argument("json: input is not well-formed JSON");
  return j;
}

const json& need(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key \"") + key + "\"");
  return *it;
}

double parse_real(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return rational_to_double(rational_from_string(j.get<std::string>()));
    } catch (const std::exception&) {
      fail(path, "string entry is not a p/q rational");
    }
  }
  fail(path, "expected a number or a \"p/q\" string");
}

Complex parse_complex(const json& j, const std::string& path) {
  if (j.is_number() || j.is_string()) return Complex(parse_real(j, path), 0.0);
  if (j.is_array()) {
    if (j.size() != 2) fail(path, "complex entries are [re, im] pairs");
    return Complex(parse_real(j[0], path + "[0]"),
                   parse_real(j[1], path + "[1]"));
  }
  fail(path, "expected a complex entry");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Index parse_index(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    fail(path, "expected a non-negative integer");
  return Index(j.get<long long>());
}

Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a matrix object");
  Index rows = parse_index(need(j, "rows", path), path + ".rows");
  Index cols = parse_index(need(j, "cols", path), path + ".cols");
  const json& data = need(j, "data", path);
  if (!data.is_array()) fail(path + ".data", "expected an array");
  if (Index(data.size()) != rows * cols)
    fail(path + ".data", "expected rows*cols entries");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index jx = 0; jx < cols; ++jx) {
      std::ostringstream os;
      os << path << ".data[" << (i * cols + jx) << "]";
      m(i, jx) = parse_complex(data[size_t(i * cols + jx)], os.str());
    }
  return m;
}

json matrix_json(const Matrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(complex_json(m(i, j)));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

std::string dump(const json& j, int indent) {
  return indent < 0 ? j.dump() : j.dump(indent);
}

json local_model_json(const LocalModel& m) {
  return json{{"n", m.n()},
              {"m", m.m()},
              {"R", matrix_json(m.r)},
              {"thetaF", matrix_json(m.theta_f)},
              {"t", matrix_json(m.t)},
              {"s", matrix_json(m.s)}};
}

LocalModel local_model_from(const json& j, const std::string& path) {
  LocalModel m;
  m.r = parse_matrix(need(j, "R", path), path + ".R");
  m.theta_f = parse_matrix(need(j, "thetaF", path), path + ".thetaF");
  m.t = parse_matrix(need(j, "t", path), path + ".t");
  m.s = parse_matrix(need(j, "s", path), path + ".s");
  if (j.contains("n") && parse_index(j["n"], path + ".n") != m.n())
    fail(path + ".n", "does not match the shape of R");
  if (j.contains("m") && parse_index(j["m"], path + ".m") != m.m())
    fail(path + ".m", "does not match the shape of thetaF");
  if (m.r.cols() != m.r.rows()) fail(path + ".R", "must be square");
  if (m.theta_f.cols() != m.theta_f.rows())
    fail(path + ".thetaF", "must be square");
  if (m.t.rows() != m.m() || m.t.cols() != m.n())
    fail(path + ".t", "must be m x n");
  if (m.s.rows() != m.n() || m.s.cols() != m.m())
    fail(path + ".s", "must be n x m");
  return m;
}

json flag_json(const Flag& f) {
  json steps = json::array();
  for (const Matrix& s : f.steps) steps.push_back(matrix_json(s));
  json j{{"dim", f.dim}, {"steps", steps}};
  if (!f.decorations.empty()) {
    json decs = json::array();
    for (const auto& d : f.decorations) {
      if (!d) {
        decs.push_back(nullptr);
      } else {
        decs.push_back(json{{"rank", d->rank},
                            {"degree", rational_to_string(d->degree)}});
      }
    }
    j["decorations"] = decs;
  }
  return j;
}

Flag flag_from(const json& j, const std::string& path) {
  Flag f;
  f.dim = parse_index(need(j, "dim", path), path + ".dim");
  const json& steps = need(j, "steps", path);
  if (!steps.is_array()) fail(path + ".steps", "expected an array");
  for (size_t i = 0; i < steps.size(); ++i) {
    std::ostringstream os;
    os << path << ".steps[" << i << "]";
    f.steps.push_back(parse_matrix(steps[i], os.str()));
  }
  if (j.contains("decorations")) {
    const json& decs = j["decorations"];
    if (!decs.is_array()) fail(path + ".decorations", "expected an array");
    if (decs.size() != steps.size())
      fail(path + ".decorations", "expected one entry per step");
    for (size_t i = 0; i < decs.size(); ++i) {
      std::ostringstream os;
      os << path << ".decorations[" << i << "]";
      if (decs[i].is_null()) {
        f.decorations.push_back(std::nullopt);
        continue;
      }
      StepSlope slope;
      slope.rank = parse_index(need(decs[i], "rank", os.str()),
                               os.str() + ".rank");
      const json& deg = need(decs[i], "degree", os.str());
      if (deg.is_string()) {
        try {
          slope.degree = rational_from_string(deg.get<std::string>());
        } catch (const std::exception&) {
          fail(os.str() + ".degree", "string entry is not a p/q rational");
        }
      } else if (deg.is_number_integer()) {
        slope.degree = Rational(deg.get<long long>());
      } else {
        fail(os.str() + ".degree", "expected an integer or a \"p/q\" string");
      }
      f.decorations.push_back(slope);
    }
  }
  return f;
}

json fd_json(const FiniteDescription& fd) {
  json rho = json::object();
  for (const auto& [label, m] : fd.rho) rho[label] = matrix_json(m);
  json local = json::array();
  for (const Puncture& p : fd.punctures)
    local.push_back(json{{"tauF", matrix_json(p.tau_f)},
                         {"C", matrix_json(p.c)},
                         {"V", matrix_json(p.v)}});
  return json{{"genus", fd.genus},
              {"punctures", Index(fd.punctures.size())},
              {"rho", rho},
              {"local", local}};
}

FiniteDescription fd_from(const json& j, const std::string& path) {
  FiniteDescription fd;
  fd.genus = parse_index(need(j, "genus", path), path + ".genus");
  const json& rho = need(j, "rho", path);
  if (!rho.is_object()) fail(path + ".rho", "expected an object");
  for (auto it = rho.begin(); it != rho.end(); ++it)
    fd.rho[it.key()] = parse_matrix(it.value(), path + ".rho." + it.key());
  const json& local = need(j, "local", path);
  if (!local.is_array()) fail(path + ".local", "expected an array");
  for (size_t a = 0; a < local.size(); ++a) {
    std::ostringstream os;
    os << path << ".local[" << a << "]";
    Puncture p;
    p.tau_f = parse_matrix(need(local[a], "tauF", os.str()), os.str() + ".tauF");
    p.c = parse_matrix(need(local[a], "C", os.str()), os.str() + ".C");
    p.v = parse_matrix(need(local[a], "V", os.str()), os.str() + ".V");
    fd.punctures.push_back(std::move(p));
  }
  if (j.contains("punctures") &&
      parse_index(j["punctures"], path + ".punctures") !=
          Index(fd.punctures.size()))
    fail(path + ".punctures", "does not match the length of \"local\"");
  return fd;
}

json fuchsian_json(const FuchsianSystem& sys) {
  json punctures = json::array();
  for (Complex p : sys.punctures) punctures.push_back(complex_json(p));
  json residues = json::array();
  for (const Matrix& a : sys.residues) residues.push_back(matrix_json(a));
  return json{{"base", complex_json(sys.base)},
              {"punctures", punctures},
              {"residues", residues}};
}

FuchsianSystem fuchsian_from(const json& j, const std::string& path) {
  FuchsianSystem sys;
  sys.base = parse_complex(need(j, "base", path), path + ".base");
  const json& punctures = need(j, "punctures", path);
  if (!punctures.is_array()) fail(path + ".punctures", "expected an array");
  for (size_t a = 0; a < punctures.size(); ++a) {
    std::ostringstream os;
    os << path << ".punctures[" << a << "]";
    sys.punctures.push_back(parse_complex(punctures[a], os.str()));
  }
  const json& residues = need(j, "residues", path);
  if (!residues.is_array()) fail(path + ".residues", "expected an array");
  for (size_t a = 0; a < residues.size(); ++a) {
    std::ostringstream os;
    os << path << ".residues[" << a << "]";
    sys.residues.push_back(parse_matrix(residues[a], os.str()));
  }
  if (sys.residues.size() != sys.punctures.size())
    fail(path + ".residues", "expected one residue per puncture");
  return sys;
}

json rh_data_json(const LocalRHData& d) {
  return json{{"T_E", matrix_json(d.t_e)},
              {"T_F", matrix_json(d.t_f)},
              {"C", matrix_json(d.c)},
              {"V", matrix_json(d.v)}};
}

LocalRHData rh_data_from(const json& j, const std::string& path) {
  LocalRHData d;
  d.t_e = parse_matrix(need(j, "T_E", path), path + ".T_E");
  d.t_f = parse_matrix(need(j, "T_F", path), path + ".T_F");
  d.c = parse_matrix(need(j, "C", path), path + ".C");
  d.v = parse_matrix(need(j, "V", path), path + ".V");
  return d;
}

}  // namespace

std::string to_json(const Matrix& m, int indent) {
  return dump(matrix_json(m), indent);
}

Matrix matrix_from_json(const std::string& text) {
  return parse_matrix(parse_text(text), "$");
}

std::string to_json(const LocalModel& m, int indent) {
  return dump(local_model_json(m), indent);
}

LocalModel local_model_from_json(const std::string& text) {
  return local_model_from(parse_text(text), "$");
}

std::string to_json(const LocalRHData& d, int indent) {
  return dump(rh_data_json(d), indent);
}

LocalRHData rh_data_from_json(const std::string& text) {
  return rh_data_from(parse_text(text), "$");
}

std::string to_json(const FiniteDescription& fd, int indent) {
  return dump(fd_json(fd), indent);
}

FiniteDescription fd_from_json(const std::string& text) {
  return fd_from(parse_text(text), "$");
}

std::string to_json(const FuchsianSystem& sys, int indent) {
  return dump(fuchsian_json(sys), indent);
}

FuchsianSystem fuchsian_from_json(const std::string& text) {
  return fuchsian_from(parse_text(text), "$");
}

std::string to_json(const Flag& f, int indent) {
  return dump(flag_json(f), indent);
}

Flag flag_from_json(const std::string& text) {
  return flag_from(parse_text(text), "$");
}

std::string to_json(const StabilityBundle& b, int indent) {
  return dump(json{{"model", local_model_json(b.model)},
                   {"flagE", flag_json(b.flag_e)},
                   {"flagF", flag_json(b.flag_f)}},
              indent);
}

StabilityBundle stability_bundle_from_json(const std::string& text) {
  json j = parse_text(text);
  StabilityBundle b;
  b.model = local_model_from(need(j, "model", "$"), "$.model");
  b.flag_e = flag_from(need(j, "flagE", "$"), "$.flagE");
  b.flag_f = flag_from(need(j, "flagF", "$"), "$.flagF");
  return b;
}

std::string json_kind(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return "";
  if (j.contains("thetaF") && j.contains("R")) return "local_model";
  if (j.contains("T_E")) return "rh_data";
  if (j.contains("rho")) return "finite_description";
  if (j.contains("residues")) return "fuchsian";
  if (j.contains("model") && j.contains("flagE")) return "stability_bundle";
  if (j.contains("steps")) return "flag";
  return "";
}

}  // namespace rhkit
