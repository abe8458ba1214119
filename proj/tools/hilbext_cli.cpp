#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hilbext/hilbext.hpp"
#include "hilbext/io.hpp"

namespace {

using namespace hilbext;
using io::json;

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kInvariantError = 2, kInputError = 3 };

int exit_code_for(const Error& e) {
  const std::string k = e.kind();
  if (k == "Unstable" || k == "NonStabilizing" || k == "LiftFailure") return kInvariantError;
  return kInputError;
}

double tolerance_from_env() {
  const char* raw = std::getenv("HILBMOD_TOL");
  if (raw == nullptr || *raw == '\0') return tol::algebraic;
  char* end = nullptr;
  const double t = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(t > 0.0)) throw InvalidArgument(std::string("HILBMOD_TOL is not a positive number: ") + raw);
  return t;
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw io::ParseError(path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::ParseError("cannot write '" + path + "'");
  out << text;
  if (!out) throw io::ParseError("write to '" + path + "' failed");
}

void render_pretty(std::ostream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      os << pad << key << ":\n";
      render_pretty(os, value, indent + 2);
    } else if (value.is_array() && !value.empty() && value[0].is_object()) {
      os << pad << key << ":\n";
      for (const auto& item : value) {
        os << pad << "  -\n";
        render_pretty(os, item, indent + 4);
      }
    } else {
      os << pad << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
    }
  }
}

void emit(const json& report, bool pretty) {
  if (pretty) render_pretty(std::cout, report, 0);
  else std::cout << report.dump(2) << "\n";
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) out += (i > 1 ? " " : "") + std::string(argv[i]);
  return out;
}

// --- build ----------------------------------------------------------------------------------

struct BuildOptions {
  std::string example;
  int k = 0;
  std::size_t angular = 64;
  std::size_t radial = 4;
  bool embed_busby = false;
  std::size_t tower_depth = 3;
  int symbol_power = 0;
  std::string defect = "finite";
  std::size_t samples = 64;
  int perturb_rank = 0;
  int perturb_dim = 4;
  std::uint64_t seed = 0;
  std::string output = "-";
};

json build_descriptor(const BuildOptions& o) {
  if (o.example == "operator") {
    auto op = power_symbol_operator(o.symbol_power, o.samples);
    op.infinite_defect = o.defect == "infinite";
    if (o.perturb_rank > 0) {
      std::mt19937_64 rng(o.seed);
      op.perturbation = random_perturbation(o.perturb_dim, o.perturb_rank, rng);
    }
    auto j = io::operator_to_json(op);
    j["symbol_power"] = o.symbol_power;
    return j;
  }
  auto disk = std::make_shared<const SimplicialSpace>(build_disk_mesh(o.radial, o.angular));
  const auto ext = o.example == "split" ? build_split_extension(disk) : build_Wk_extension(o.k, disk);
  auto j = io::extension_to_json(ext, o.example);
  if (o.embed_busby) {
    const auto tower = annulus_tower(o.tower_depth, ext.boundary.size());
    j["busby"] = io::isometry_to_json(busby_invariant(ext, tower));
  }
  return j;
}

int run_build(const BuildOptions& o, const std::string& echo) {
  const auto text = build_descriptor(o).dump(2) + "\n";
  write_output(o.output, text);
  if (o.output != "-") {
    json report;
    report["command"] = echo;
    report["example"] = o.example;
    report["output"] = o.output;
    report["output_digest"] = fnv1a64(text);
    std::cout << report.dump(2) << "\n";
  }
  return kOk;
}

// --- classify -------------------------------------------------------------------------------

struct CommonOptions {
  std::string input;
  std::size_t tower_depth = 3;
  bool pretty = false;
  bool timing = false;
};

struct ClassifyOptions : CommonOptions {
  std::string csv;
};

json base_report(const std::string& echo, const std::string& text, double tol) {
  json r;
  r["command"] = echo;
  r["input_digest"] = fnv1a64(text);
  r["tolerances"] = {{"algebraic", tol},
                     {"corona_stabilization", tol::corona_stabilization},
                     {"kernel_singular_value", tol::kernel_singular_value}};
  return r;
}

int run_classify(const ClassifyOptions& o, const std::string& echo) {
  const auto start = std::chrono::steady_clock::now();
  const double tol = tolerance_from_env();
  const auto text = read_file(o.input);
  const auto doc = parse_json(text, o.input);
  auto report = base_report(echo, text, tol);
  std::ostringstream csv;

  const auto type = doc.value("type", std::string());
  if (type == "operator") {
    const auto op = io::operator_from_json(doc);
    const auto details = fredholm_index_details(op);
    report["type"] = "operator";
    report["invariant"] = io::record_to_json(InvariantRecord::from(details.result));
    if (details.result.is_finite()) {
      report["index"] = details.result.index;
      report["truncation"] = details.truncation;
      report["correction"] = details.correction;
    }
    report["symbol_winding"] = details.symbol_winding;
    csv << "truncation,ker,ker_adjoint,perturbed\n";
    if (details.result.is_finite()) {
      csv << details.perturbed.n << "," << details.perturbed.ker << "," << details.perturbed.ker_adjoint << ",1\n";
      csv << details.unperturbed.n << "," << details.unperturbed.ker << "," << details.unperturbed.ker_adjoint
          << ",0\n";
    }
    if (!o.csv.empty()) write_output(o.csv, csv.str());
  } else if (type == "extension") {
    const auto desc = io::extension_from_json(doc);
    const auto tower = annulus_tower(o.tower_depth, desc.ext.boundary.size());
    const auto levels = busby_levels(desc.ext, tower);
    const auto per_level = stabilization_report(levels);
    csv << "level,radius,cycle,winding\n";
    json lv = json::array();
    for (std::size_t t = 0; t < per_level.per_level.size(); ++t) {
      const auto& rec = per_level.per_level[t];
      lv.push_back({{"level", t}, {"radius", tower.radii[t]}, {"invariant", io::record_to_json(rec)}});
      for (std::size_t c = 0; c < rec.windings.size(); ++c)
        csv << t << "," << tower.radii[t] << "," << c << "," << rec.windings[c] << "\n";
    }
    if (!o.csv.empty()) write_output(o.csv, csv.str());
    const auto record = stabilized_invariant(levels);
    const auto fields = detail::tower_fields(desc.ext, tower);
    const auto limit = corona_limit(fields, tower, tol::corona_stabilization, tol);
    report["type"] = "extension";
    report["example"] = desc.example;
    report["tower_depth"] = o.tower_depth;
    report["levels"] = lv;
    report["corona_deviation"] = limit.final_deviation;
    report["invariant"] = io::record_to_json(record);
  } else {
    throw io::ParseError("descriptor type must be 'extension' or 'operator'");
  }
  if (o.timing)
    report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(report, o.pretty);
  return kOk;
}

// --- verify ---------------------------------------------------------------------------------

struct VerifyOptions : CommonOptions {
  std::string suite = "all";
  std::size_t trials = 50;
  std::uint64_t seed = 0;
};

json check_entry(const std::string& name, bool passed, std::size_t trials, double tolerance) {
  return {{"name", name}, {"passed", passed}, {"trials", trials}, {"tolerance", tolerance}};
}

json morphism_counterexample(const MorphismCheck& c) {
  return {{"sample", c.sample}, {"vertex", c.vertex}, {"residual", c.residual}, {"what", c.what}};
}

std::vector<json> verify_extension(const io::ExtensionDescriptor& desc, const VerifyOptions& o, double tol) {
  const auto& ext = desc.ext;
  const auto tower = annulus_tower(o.tower_depth, ext.boundary.size());
  const auto delta = busby_invariant(ext, tower);
  const bool all = o.suite == "all";
  std::mt19937_64 rng(o.seed);
  std::vector<json> checks;

  if (all || o.suite == "morphism") {
    const auto bump = interior_bump(ext);
    std::vector<SectionPair> ideal_pairs;
    for (std::size_t i = 0; i < o.trials; ++i) {
      auto a = act(random_section(ext.v_bundle, rng), bump);
      auto b = act(random_section(ext.v_bundle, rng), bump);
      ideal_pairs.emplace_back(std::move(a), std::move(b));
    }
    const auto inc = check_morphism_report(ext.inclusion, ideal_pairs, tol);
    auto entry = check_entry("inclusion_morphism", inc.ok, o.trials, tol);
    if (!inc) entry["counterexample"] = morphism_counterexample(inc);
    checks.push_back(entry);

    ModuleMorphism busby{delta.source(), delta.target(), delta.vertex_map(), delta.values()};
    auto name = std::string("busby_morphism");
    if (desc.busby) {
      name = "stored_busby_morphism";
      auto raw = io::raw_isometry_from_json(*desc.busby, delta.vertex_count());
      busby.vertex_map = std::move(raw.vertex_map);
      busby.fiber_transform = std::move(raw.values);
    }
    const auto pairs = random_section_pairs(ext.z_bundle, o.trials, rng);
    entry = check_entry(name, true, o.trials, tol);
    if (const auto bad = find_isometry_violation(*busby.source, busby.vertex_map, *busby.target,
                                                 busby.fiber_transform, tol)) {
      entry["passed"] = false;
      entry["counterexample"] = {{"vertex", bad->vertex}, {"residual", bad->residual}, {"what", bad->what}};
    } else if (const auto chk = check_morphism_report(busby, pairs, tol); !chk) {
      entry["passed"] = false;
      entry["counterexample"] = morphism_counterexample(chk);
    }
    checks.push_back(entry);

    const auto w = sample_w_sections(ext, std::min<std::size_t>(o.trials, 12), rng);
    checks.push_back(check_entry("quotient_morphism", check_quotient_morphism(ext, w, tol), w.size(), tol));
  }

  if (all || o.suite == "roundtrip") {
    const auto probes = standard_probes(ext.z_bundle);
    auto entry = check_entry("isometry_roundtrip", true, o.trials, tol);
    for (std::size_t t = 0; t < o.trials; ++t) {
      const auto d = t == 0 ? delta : random_isometry_field(delta.source(), delta.vertex_map(), delta.target(), rng);
      if (!roundtrip_check(d, probes, tol)) {
        entry["passed"] = false;
        entry["counterexample"] = {{"trial", t}};
        break;
      }
    }
    checks.push_back(entry);

    const auto rebuilt = extension_from_busby(delta, ext.v_bundle, ext.z_bundle, tower);
    const auto again = busby_invariant(rebuilt, tower);
    const double diff = max_entry_difference(again.values(), delta.values());
    entry = check_entry("busby_reconstruction", diff <= tol::corona_agreement, 1, tol::corona_agreement);
    if (diff > tol::corona_agreement) entry["counterexample"] = {{"max_entry_difference", diff}};
    checks.push_back(entry);
  }

  if (all || o.suite == "exactness") {
    const auto samples = sample_w_sections(ext, o.trials, rng);
    const auto ex = check_exactness_report(ext, samples, tol);
    auto entry = check_entry("exactness", ex.ok, samples.size(), tol);
    if (!ex) entry["counterexample"] = {{"sample", ex.sample}, {"what", ex.what}};
    checks.push_back(entry);
    const auto span = spanning_w_sample(ext);
    checks.push_back(check_entry("fullness", check_fullness(ext, span, tol), span.size(), tol));
  }
  return checks;
}

std::vector<json> verify_operator(const StructuredOperator& op, const VerifyOptions& o) {
  const auto base = fredholm_index(op);
  std::mt19937_64 rng(o.seed);
  auto entry = check_entry("index_invariance", true, o.trials, tol::kernel_singular_value);
  entry["index"] = io::record_to_json(InvariantRecord::from(base));
  for (std::size_t t = 0; t < o.trials; ++t) {
    const Eigen::Index d = std::max<Eigen::Index>(4, op.perturbation.rows());
    const auto rank = std::uniform_int_distribution<Eigen::Index>(1, d)(rng);
    auto perturbed = op;
    perturbed.perturbation = random_perturbation(d, rank, rng);
    if (op.perturbation.size() > 0) perturbed.perturbation.topLeftCorner(op.perturbation.rows(), op.perturbation.cols()) += op.perturbation;
    const auto got = fredholm_index(perturbed);
    if (!(got == base)) {
      entry["passed"] = false;
      entry["counterexample"] = {{"trial", t}, {"rank", rank}, {"invariant", io::record_to_json(InvariantRecord::from(got))}};
      break;
    }
  }
  return {entry};
}

int run_verify(const VerifyOptions& o, const std::string& echo) {
  const auto start = std::chrono::steady_clock::now();
  const double tol = tolerance_from_env();
  const auto text = read_file(o.input);
  const auto doc = parse_json(text, o.input);
  auto report = base_report(echo, text, tol);
  report["suite"] = o.suite;
  report["seed"] = o.seed;

  std::vector<json> checks;
  const auto type = doc.value("type", std::string());
  if (type == "operator") checks = verify_operator(io::operator_from_json(doc), o);
  else if (type == "extension") checks = verify_extension(io::extension_from_json(doc), o, tol);
  else throw io::ParseError("descriptor type must be 'extension' or 'operator'");

  bool passed = true;
  for (const auto& c : checks) passed = passed && c["passed"].get<bool>();
  report["checks"] = checks;
  report["passed"] = passed;
  if (o.timing)
    report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(report, o.pretty);
  return passed ? kOk : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, classify and verify Hilbert-module extensions over meshed spaces"};
  app.require_subcommand(1);

  BuildOptions bo;
  auto* build = app.add_subcommand("build", "Write an example descriptor");
  build->add_option("example", bo.example, "disk-wk | split | operator")
      ->required()
      ->check(CLI::IsMember({"disk-wk", "split", "operator"}));
  build->add_option("--k", bo.k, "Winding of the boundary datum (disk-wk)");
  build->add_option("--angular", bo.angular, "Boundary vertices of the disk")->check(CLI::Range(3, 10000));
  build->add_option("--radial", bo.radial, "Rings of the disk")->check(CLI::Range(1, 1000));
  build->add_flag("--embed-busby", bo.embed_busby, "Store the Busby field in the descriptor");
  build->add_option("--tower-depth", bo.tower_depth, "Tower depth used for --embed-busby")->check(CLI::Range(2, 64));
  build->add_option("--symbol-power", bo.symbol_power, "Degree k of the symbol z^k (operator)");
  build->add_option("--defect", bo.defect, "finite | infinite")->check(CLI::IsMember({"finite", "infinite"}));
  build->add_option("--samples", bo.samples, "Symbol samples on the circle")->check(CLI::Range(1, 1 << 16));
  build->add_option("--perturb-rank", bo.perturb_rank, "Rank of a random finite-rank block")->check(CLI::Range(0, 64));
  build->add_option("--perturb-dim", bo.perturb_dim, "Size of the random block")->check(CLI::Range(1, 64));
  build->add_option("--seed", bo.seed, "Random seed");
  build->add_option("-o,--output", bo.output, "Output file, - for stdout");

  ClassifyOptions co;
  auto* classify = app.add_subcommand("classify", "Compute the homotopy invariant of a descriptor");
  classify->add_option("input", co.input, "Descriptor file")->required();
  classify->add_option("--tower-depth", co.tower_depth, "Annulus tower levels")->check(CLI::Range(2, 64));
  classify->add_flag("--pretty", co.pretty, "Human-readable report");
  classify->add_option("--csv", co.csv, "Write per-level windings as CSV");
  classify->add_flag("--timing", co.timing, "Include wall time in the report");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "Run property suites on a descriptor");
  verify->add_option("input", vo.input, "Descriptor file")->required();
  verify->add_option("--suite", vo.suite, "morphism | roundtrip | exactness | all")
      ->check(CLI::IsMember({"morphism", "roundtrip", "exactness", "all"}));
  verify->add_option("--trials", vo.trials, "Random trials per property")->check(CLI::Range(1, 100000));
  verify->add_option("--seed", vo.seed, "Random seed");
  verify->add_option("--tower-depth", vo.tower_depth, "Annulus tower levels")->check(CLI::Range(2, 64));
  verify->add_flag("--pretty", vo.pretty, "Human-readable report");
  verify->add_flag("--timing", vo.timing, "Include wall time in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  const auto echo = join_args(argc, argv);
  try {
    if (*build) return run_build(bo, echo);
    if (*classify) return run_classify(co, echo);
    return run_verify(vo, echo);
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
