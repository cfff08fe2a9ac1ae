// ---------------------------------------------------------------------------
// rhkit_cli.cpp
//
// Command-line frontend.  Subcommands:
//
//   validate         check any payload (model, data, description, flag, ...)
//   rh               model -> monodromy data
//   inv-rh           monodromy data -> model, for a chosen branch strip
//   shear            integer spectral shifts; --mode make-good|down|up
//   jh               composition series of a finite description
//   s-equiv          same simple factors?  accepts descriptions or raw data
//   stability-check  filtration compatibility report for a bundle
//   monodromy        transported loop matrices of a pole system
//   assemble         finite description of a pole system
//   gen              seeded example payloads
//
// Exit codes: 0 success, 1 usage or malformed input, 2 failed validation or
// an impossible request.  The resolved configuration is echoed on stderr;
// payloads go to --out (default stdout).
// ---------------------------------------------------------------------------

#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhkit/filtration.hpp"
#include "rhkit/finite_description.hpp"
#include "rhkit/fuchsian.hpp"
#include "rhkit/generators.hpp"
#include "rhkit/json_io.hpp"
#include "rhkit/local_model.hpp"
#include "rhkit/matfun.hpp"
#include "rhkit/rh_local.hpp"
#include "rhkit/shear.hpp"

namespace {

using nlohmann::json;

struct Common {
  std::string input = "-";
  std::string out = "-";
  double tol = rhkit::kDefaultTol;
  std::uint64_t seed = 1;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& path, const std::string& payload) {
  if (path == "-") {
    std::cout << payload << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << payload << "\n";
}

void echo_config(const json& config) { std::cerr << "config: " << config.dump() << "\n"; }

rhkit::ScalarMode parse_mode(const std::string& mode) {
  if (mode == "exact") return rhkit::ScalarMode::Exact;
  if (mode == "numeric") return rhkit::ScalarMode::Numeric;
  throw std::invalid_argument("mode must be \"exact\" or \"numeric\"");
}

json fd_as_json(const rhkit::FiniteDescription& fd) {
  return json::parse(rhkit::to_json(fd));
}

// Accept either a finite description or raw local monodromy data (which is
// dressed into its two-puncture description).
rhkit::FiniteDescription load_description(const std::string& text) {
  const std::string kind = rhkit::json_kind(text);
  if (kind == "finite_description") return rhkit::fd_from_json(text);
  if (kind == "rh_data")
    return rhkit::fd_from_local(rhkit::rh_data_from_json(text));
  throw std::invalid_argument(
      "expected a finite description or local monodromy data");
}

int run_validate(const Common& c) {
  const std::string text = read_input(c.input);
  const std::string kind = rhkit::json_kind(text);
  json report{{"kind", kind}};
  bool ok = false;
  if (kind == "local_model") {
    rhkit::ValidationReport v =
        rhkit::validate(rhkit::local_model_from_json(text), c.tol);
    ok = v.ok;
    report["ok"] = v.ok;
    report["residual_st"] = v.residual_st;
    report["residual_ts"] = v.residual_ts;
    report["residual_intertwine_t"] = v.residual_intertwine_t;
    report["residual_intertwine_s"] = v.residual_intertwine_s;
  } else if (kind == "rh_data") {
    rhkit::RHDataValidation v =
        rhkit::validate_rh_data(rhkit::rh_data_from_json(text), c.tol);
    ok = v.ok;
    report["ok"] = v.ok;
    report["residual_vc"] = v.residual_vc;
    report["residual_cv"] = v.residual_cv;
    report["residual_equiv_c"] = v.residual_equiv_c;
    report["residual_equiv_v"] = v.residual_equiv_v;
    report["invertible_te"] = v.invertible_te;
    report["invertible_tf"] = v.invertible_tf;
  } else if (kind == "finite_description") {
    rhkit::FDValidation v = rhkit::validate_fd(rhkit::fd_from_json(text), c.tol);
    ok = v.ok;
    report["ok"] = v.ok;
    report["relation_residual"] = v.relation_residual;
    report["invariant_residual"] = v.invariant_residual;
    report["errors"] = v.errors;
  } else if (kind == "flag") {
    rhkit::FlagCheck v = rhkit::check_flag(rhkit::flag_from_json(text), c.tol);
    ok = v.ok;
    report["ok"] = v.ok;
    report["reason"] = v.reason;
  } else if (kind == "stability_bundle") {
    rhkit::StabilityBundle b = rhkit::stability_bundle_from_json(text);
    rhkit::ValidationReport v = rhkit::validate(b.model, c.tol);
    rhkit::FlagCheck fe = rhkit::check_flag(b.flag_e, c.tol);
    rhkit::FlagCheck ff = rhkit::check_flag(b.flag_f, c.tol);
    ok = v.ok && fe.ok && ff.ok;
    report["ok"] = ok;
    report["model_ok"] = v.ok;
    report["flagE_ok"] = fe.ok;
    report["flagF_ok"] = ff.ok;
  } else if (kind == "fuchsian") {
    rhkit::FuchsianSystem sys = rhkit::fuchsian_from_json(text);
    rhkit::LoopBasket basket = rhkit::default_basket(sys);  // shape checks
    rhkit::Matrix sum = rhkit::Matrix::Zero(sys.dim(), sys.dim());
    for (const rhkit::Matrix& a : sys.residues) sum += a;
    double residue_sum = rhkit::norm1(sum);
    ok = true;
    report["ok"] = true;
    report["residue_sum"] = residue_sum;
    report["clearance"] = basket.clearance;
  } else {
    throw std::invalid_argument("unrecognized payload");
  }
  write_output(c.out, report.dump(2));
  return ok ? 0 : 2;
}

int run_rh(const Common& c) {
  rhkit::LocalModel m = rhkit::local_model_from_json(read_input(c.input));
  write_output(c.out, rhkit::to_json(rhkit::rh_local(m)));
  return 0;
}

int run_inv_rh(const Common& c, double section_anchor) {
  rhkit::LocalRHData d = rhkit::rh_data_from_json(read_input(c.input));
  rhkit::BranchSection section{section_anchor};
  rhkit::InvRHReport report;
  rhkit::LocalModel m = rhkit::inv_rh_local(d, section, c.tol, &report);
  std::cerr << "inv-rh: tf_consistency=" << report.tf_consistency
            << " phi_r_condition=" << report.phi_r_condition << "\n";
  write_output(c.out, rhkit::to_json(m));
  return 0;
}

int run_shear(const Common& c, const std::string& mode,
              std::complex<double> alpha) {
  rhkit::LocalModel m = rhkit::local_model_from_json(read_input(c.input));
  json info;
  rhkit::LocalModel result;
  if (mode == "make-good") {
    rhkit::MakeGoodResult r = rhkit::make_good(m, c.tol);
    result = r.model;
    info["good"] = r.good;
    info["terminated"] = r.terminated;
    json steps = json::array();
    for (const rhkit::ShearStep& s : r.steps)
      steps.push_back(
          {{"alpha", {s.alpha.real(), s.alpha.imag()}},
           {"direction",
            s.direction == rhkit::ShiftDirection::Down ? "down" : "up"},
           {"zero_multiplicity_after", s.zero_multiplicity_after}});
    info["steps"] = steps;
    if (!r.terminated) {
      std::cerr << "shear: " << info.dump() << "\n";
      throw std::runtime_error("make-good did not terminate in its budget");
    }
  } else if (mode == "down" || mode == "up") {
    rhkit::ShearResult r = mode == "down" ? rhkit::shift_down(m, alpha, c.tol)
                                          : rhkit::shift_up(m, alpha, c.tol);
    result = r.model;
    info["direction"] = mode;
  } else {
    throw std::invalid_argument("shear mode must be make-good, down, or up");
  }
  std::cerr << "shear: " << info.dump() << "\n";
  write_output(c.out, rhkit::to_json(result));
  return 0;
}

int run_jh(const Common& c, const std::string& mode) {
  rhkit::FiniteDescription fd = load_description(read_input(c.input));
  rhkit::JordanHolderResult r =
      rhkit::jordan_holder(fd, parse_mode(mode), c.tol, c.seed);
  json out{{"status",
            r.status == rhkit::JHStatus::Certified ? "certified" : "unresolved"},
           {"notes", r.notes}};
  json factors = json::array();
  for (const rhkit::FiniteDescription& f : r.factors)
    factors.push_back(fd_as_json(f));
  out["factors"] = factors;
  json dims = json::array();
  for (const rhkit::SubObject& s : r.filtration) dims.push_back(s.total_dim());
  out["filtration_dims"] = dims;
  write_output(c.out, out.dump(2));
  return r.status == rhkit::JHStatus::Certified ? 0 : 2;
}

int run_s_equiv(const Common& c, const std::string& second,
                const std::string& mode) {
  rhkit::FiniteDescription x = load_description(read_input(c.input));
  rhkit::FiniteDescription y = load_description(read_input(second));
  std::optional<bool> eq =
      rhkit::s_equivalent(x, y, parse_mode(mode), c.tol, c.seed);
  json out;
  out["equivalent"] = eq ? json(*eq) : json(nullptr);
  write_output(c.out, out.dump(2));
  return eq ? 0 : 2;
}

int run_stability_check(const Common& c) {
  rhkit::StabilityBundle b =
      rhkit::stability_bundle_from_json(read_input(c.input));
  rhkit::JumpGraph gs = rhkit::jump_graph(b.model.t, b.flag_e, b.flag_f, c.tol);
  rhkit::JumpGraph gt = rhkit::jump_graph(b.model.s, b.flag_f, b.flag_e, c.tol);
  bool comp = rhkit::compatible(gs, gt);
  json out{{"gs_points", gs.points},
           {"gt_points", gt.points},
           {"warnings", gs.warnings},
           {"compatible", comp}};
  for (const std::string& w : gt.warnings) out["warnings"].push_back(w);
  if (auto w = rhkit::polygonal_weights(gs, gt)) {
    json p = json::array(), q = json::array();
    for (const rhkit::Rational& x : w->p)
      p.push_back(rhkit::rational_to_string(x));
    for (const rhkit::Rational& x : w->q)
      q.push_back(rhkit::rational_to_string(x));
    out["weights"] = {{"p", p}, {"q", q}};
  } else {
    out["weights"] = nullptr;
  }
  write_output(c.out, out.dump(2));
  return comp ? 0 : 2;
}

int run_monodromy(const Common& c) {
  rhkit::FuchsianSystem sys = rhkit::fuchsian_from_json(read_input(c.input));
  rhkit::MonodromyResult r = rhkit::monodromy(sys, c.tol);
  json loops = json::array();
  for (const rhkit::Matrix& m : r.loops)
    loops.push_back(json::parse(rhkit::to_json(m)));
  json out{{"closed", r.closed},
           {"relation_residual", r.relation_residual},
           {"order", r.basket.order},
           {"clearance", r.basket.clearance},
           {"charpoly_distance", r.charpoly_distance},
           {"loops", loops}};
  write_output(c.out, out.dump(2));
  return 0;
}

int run_assemble(const Common& c, const std::string& model_kind) {
  rhkit::FuchsianSystem sys = rhkit::fuchsian_from_json(read_input(c.input));
  rhkit::CanonicalKind kind;
  if (model_kind == "meromorphic") {
    kind = rhkit::CanonicalKind::Meromorphic;
  } else if (model_kind == "torsion") {
    kind = rhkit::CanonicalKind::Torsion;
  } else if (model_kind == "minimal") {
    kind = rhkit::CanonicalKind::Minimal;
  } else {
    throw std::invalid_argument(
        "model kind must be meromorphic, torsion, or minimal");
  }
  std::vector<rhkit::LocalModel> models;
  for (const rhkit::Matrix& a : sys.residues)
    models.push_back(rhkit::canonical_from_residue(a, kind));
  rhkit::FiniteDescription fd = rhkit::assemble_fd(sys, models, c.tol);
  write_output(c.out, rhkit::to_json(fd));
  return 0;
}

int run_gen(const Common& c, const std::string& what, rhkit::Index n,
            rhkit::Index m, rhkit::Index k) {
  std::string payload;
  if (what == "model") {
    payload = rhkit::to_json(rhkit::random_model(n, m, c.seed));
  } else if (what == "strip-model") {
    payload = rhkit::to_json(rhkit::random_strip_model(n, m, c.seed));
  } else if (what == "resonant-model") {
    payload = rhkit::to_json(rhkit::random_resonant_model(n, m, c.seed));
  } else if (what == "rh-data") {
    payload = rhkit::to_json(rhkit::rh_local(rhkit::random_model(n, m, c.seed)));
  } else if (what == "fd") {
    payload = rhkit::to_json(
        rhkit::fd_from_local(rhkit::rh_local(rhkit::random_model(n, m, c.seed))));
  } else if (what == "fuchsian") {
    payload = rhkit::to_json(rhkit::random_fuchsian(k, n, c.seed));
  } else if (what == "bundle") {
    payload = rhkit::to_json(rhkit::random_stability_bundle(n, m, c.seed));
  } else {
    throw std::invalid_argument(
        "gen kind must be model, strip-model, resonant-model, rh-data, fd, "
        "fuchsian, or bundle");
  }
  write_output(c.out, payload);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fiber-level correspondence toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string mode = "numeric";
  std::string shear_mode = "make-good";
  std::string model_kind = "meromorphic";
  std::string gen_what = "model";
  std::string second_input;
  std::complex<double> alpha{0.0, 0.0};
  double section_anchor = 0.0;
  rhkit::Index gen_n = 3, gen_m = 3, gen_k = 3;

  auto add_common = [&](CLI::App* sub, bool with_input = true) {
    if (with_input)
      sub->add_option("input", common.input, "input file, or - for stdin");
    sub->add_option("--tol", common.tol, "tolerance for residual checks");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--out", common.out, "output file, or - for stdout");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a payload");
  add_common(validate);

  CLI::App* rh = app.add_subcommand("rh", "model -> monodromy data");
  add_common(rh);

  CLI::App* inv_rh = app.add_subcommand("inv-rh", "monodromy data -> model");
  add_common(inv_rh);
  inv_rh->add_option("--section", section_anchor,
                     "strip anchor; eigenvalues land in [anchor, anchor+1)");

  CLI::App* shear = app.add_subcommand("shear", "integer spectral shifts");
  add_common(shear);
  shear->add_option("--mode", shear_mode, "make-good, down, or up");
  shear->add_option("--alpha", alpha, "eigenvalue to shift (re im)");

  CLI::App* jh = app.add_subcommand("jh", "composition series");
  add_common(jh);
  jh->add_option("--mode", mode, "exact or numeric");

  CLI::App* s_equiv = app.add_subcommand("s-equiv", "same simple factors?");
  add_common(s_equiv);
  s_equiv->add_option("second", second_input, "second input file")->required();
  s_equiv->add_option("--mode", mode, "exact or numeric");

  CLI::App* stability =
      app.add_subcommand("stability-check", "filtration compatibility report");
  add_common(stability);

  CLI::App* mono = app.add_subcommand("monodromy", "transported loop matrices");
  add_common(mono);

  CLI::App* assemble =
      app.add_subcommand("assemble", "finite description of a pole system");
  add_common(assemble);
  assemble->add_option("--model-kind", model_kind,
                       "meromorphic, torsion, or minimal");

  CLI::App* gen = app.add_subcommand("gen", "seeded example payloads");
  gen->add_option("kind", gen_what,
                  "model, strip-model, resonant-model, rh-data, fd, fuchsian, "
                  "or bundle")
      ->required();
  add_common(gen, false);
  gen->add_option("--n", gen_n, "first dimension");
  gen->add_option("--m", gen_m, "second dimension");
  gen->add_option("--k", gen_k, "number of punctures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  json config{{"command", sub->get_name()}, {"tol", common.tol},
              {"seed", common.seed},        {"out", common.out},
              {"input", common.input}};
  if (sub == inv_rh) config["section"] = section_anchor;
  if (sub == jh || sub == s_equiv) config["mode"] = mode;
  if (sub == shear) config["mode"] = shear_mode;
  if (sub == assemble) config["model_kind"] = model_kind;
  if (sub == gen) {
    config["kind"] = gen_what;
    config["n"] = gen_n;
    config["m"] = gen_m;
    config["k"] = gen_k;
  }
  if (sub == s_equiv) config["second"] = second_input;
  echo_config(config);

  try {
    if (sub == validate) return run_validate(common);
    if (sub == rh) return run_rh(common);
    if (sub == inv_rh) return run_inv_rh(common, section_anchor);
    if (sub == shear) return run_shear(common, shear_mode, alpha);
    if (sub == jh) return run_jh(common, mode);
    if (sub == s_equiv) return run_s_equiv(common, second_input, mode);
    if (sub == stability) return run_stability_check(common);
    if (sub == mono) return run_monodromy(common);
    if (sub == assemble) return run_assemble(common, model_kind);
    if (sub == gen) return run_gen(common, gen_what, gen_n, gen_m, gen_k);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
