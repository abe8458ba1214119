// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace hilbext;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

SpacePtr corona_cycle(std::size_t n) { return corona_space(annulus_tower(2, n)); }

std::vector<VertexId> rotation_map(std::size_t n, std::size_t shift) {
  std::vector<VertexId> f(n);
  for (VertexId z = 0; z < n; ++z) f[z] = (z + shift) % n;
  return f;
}

struct FieldData {
  BundlePtr xi;
  BundlePtr zeta;
  std::vector<VertexId> map;
};

FieldData random_field_data(std::size_t n, std::mt19937_64& rng) {
  const auto base = corona_cycle(n);
  std::uniform_int_distribution<Eigen::Index> dim(1, 4);
  const auto m = dim(rng);
  std::uniform_int_distribution<Eigen::Index> src(1, m);
  const auto k = src(rng);
  std::uniform_int_distribution<Eigen::Index> tgt(k, m);
  std::uniform_int_distribution<std::size_t> shift(0, n - 1);
  return {fixture::smooth_field(base, m, k, rng), fixture::smooth_field(base, m, tgt(rng), rng),
          rotation_map(n, shift(rng))};
}

Outcome roundtrip_bijection() {
  Outcome out;
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 120; ++trial) {
    const auto data = random_field_data(32, rng);
    const auto d = random_isometry_field(data.xi, data.map, data.zeta, rng);
    const auto probes = standard_probes(data.xi);
    const auto d_back = delta_to_isometry(isometry_to_delta(d), probes);
    out.require(d_back.vertex_map() == d.vertex_map() &&
                    max_entry_difference(d_back.values(), d.values()) <= 1e-9,
                "D -> Delta -> D differs at trial " + std::to_string(trial));

    const auto e = random_isometry_field(data.xi, data.map, data.zeta, rng);
    const ModuleMorphism delta{data.xi, data.zeta, data.map, e.values()};
    const auto delta_back = isometry_to_delta(delta_to_isometry(delta, probes));
    out.require(delta_back.vertex_map == delta.vertex_map &&
                    max_entry_difference(delta_back.fiber_transform, delta.fiber_transform) <= 1e-9,
                "Delta -> D -> Delta differs at trial " + std::to_string(trial));
  }
  return out;
}

Outcome wk_separation() {
  Outcome out;
  const auto disk = fixture::disk(4, 64);
  const auto tower = annulus_tower(3, 64);
  std::vector<IsometryField> fields;
  for (int k = -3; k <= 3; ++k) {
    const auto ext = build_Wk_extension(k, disk);
    const auto rec = stabilized_invariant(ext, tower);
    out.require(rec == InvariantRecord::finite({k}), "W_" + std::to_string(k) + " classified as " + describe(rec));
    fields.push_back(busby_invariant(ext, tower));
  }
  int correct = 0;
  for (int j = 0; j < 7; ++j)
    for (int k = 0; k < 7; ++k) {
      const auto v = homotopy_equivalent(fields[j], fields[k]);
      const bool certified = !v.equivalent || validate_certificate(v.certificate, fields[j], fields[k]);
      if (v.equivalent == (j == k) && certified) ++correct;
    }
  out.require(correct == 49, std::to_string(correct) + "/49 pairwise verdicts correct");
  return out;
}

Outcome index_classification() {
  Outcome out;
  std::mt19937_64 rng(777);
  std::size_t max_truncation = 0;
  for (int k = 0; k <= 5; ++k) {
    const auto base = fredholm_index_details(power_symbol_operator(k));
    max_truncation = std::max(max_truncation, base.truncation);
    out.require(base.result == ExtensionClass::finite(-k), "z^" + std::to_string(k) + " has the wrong index");
    for (int trial = 0; trial < 50; ++trial) {
      auto op = power_symbol_operator(k);
      std::uniform_int_distribution<Eigen::Index> dim(1, 12);
      const auto d = dim(rng);
      std::uniform_int_distribution<Eigen::Index> rank(1, d);
      op.perturbation = random_perturbation(d, rank(rng), rng);
      const auto det = fredholm_index_details(op);
      max_truncation = std::max(max_truncation, det.truncation);
      out.require(det.result == base.result,
                  "perturbation " + std::to_string(trial) + " of z^" + std::to_string(k) + " changed the index");
    }
  }
  out.require(max_truncation <= 512, "truncation exceeded 512");
  for (int j = 0; j <= 5; ++j)
    for (int k = 0; k <= 5; ++k) {
      auto a = power_symbol_operator(j);
      auto b = power_symbol_operator(k);
      out.require(homotopy_equivalent(a, b) == (j == k), "finite classes misjudged");
      a.infinite_defect = b.infinite_defect = true;
      out.require(homotopy_equivalent(a, b), "infinite classes not identified");
      a.infinite_defect = false;
      out.require(!homotopy_equivalent(a, b), "finite and infinite classes identified");
    }
  return out;
}

Outcome morphism_axioms() {
  Outcome out;
  std::mt19937_64 rng(4242);
  int rejected = 0;
  int corrupted = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = random_field_data(32, rng);
    const auto d = random_isometry_field(data.xi, data.map, data.zeta, rng);
    const auto pairs = random_section_pairs(data.xi, 50, rng);
    out.require(check_morphism(isometry_to_delta(d), pairs, 1e-9),
                "isometry_to_delta fails the axiom at trial " + std::to_string(trial));

    std::uniform_int_distribution<VertexId> vertex(0, 31);
    for (int mode = 0; mode < 3; ++mode) {
      auto values = d.values();
      const auto z = vertex(rng);
      if (mode == 0) values[z] *= 1.01;
      if (mode == 1) values[z](0, 0) += 1e-4;
      if (mode == 2) values[z] = Matrix::Identity(values[z].rows(), values[z].cols());
      if (max_entry_difference(values, d.values()) == 0.0) continue;
      ++corrupted;
      try {
        IsometryField bad(data.xi, data.map, data.zeta, values);
        // only acceptable if the change happened to preserve the isometry invariant
        if (!find_isometry_violation(*data.xi, data.map, *data.zeta, values)) ++rejected;
      } catch (const InvalidIsometry&) {
        ++rejected;
      }
    }
  }
  out.require(rejected == corrupted,
              std::to_string(corrupted - rejected) + " of " + std::to_string(corrupted) + " invalid fields accepted");
  return out;
}

Outcome quotient_norm() {
  Outcome out;
  std::mt19937_64 rng(9001);
  const auto disk = fixture::disk(4, 24);
  const auto p = fixture::smooth_field(disk, 3, 2, rng);
  std::uniform_int_distribution<VertexId> vertex(0, disk->vertex_count() - 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = random_section(p, rng);
    std::vector<Vector> scaled;
    const double sup = sup_norm(raw);
    for (const auto& x : raw.values()) scaled.push_back(x / sup);
    const SectionField s(p, std::move(scaled));
    const auto z = vertex(rng);
    const double brute = oracle::brute_force_quotient_norm(s, z, 1000, rng);
    out.require(std::abs(fiber_quotient_norm(s, z) - brute) <= 1e-3,
                "section " + std::to_string(trial) + ": formula " + std::to_string(fiber_quotient_norm(s, z)) +
                    " vs oracle " + std::to_string(brute));
  }
  return out;
}

Outcome exactness_and_fullness() {
  Outcome out;
  std::mt19937_64 rng(6);
  const auto disk = fixture::disk(4, 32);
  for (int k : {0, 1, 2}) {
    const auto ext = build_Wk_extension(k, disk);
    const auto samples = sample_w_sections(ext, 50, rng);
    const auto rep = check_exactness_report(ext, samples);
    out.require(rep.ok, "W_" + std::to_string(k) + " exactness fails at sample " + std::to_string(rep.sample));
    out.require(check_fullness(ext, spanning_w_sample(ext)), "W_" + std::to_string(k) + " not full");
  }
  return out;
}

Outcome winding_algebra() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> degree(-4, 4);
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> shift(0.0, 6.0);
  const auto random_loop = [&] {
    const int k = degree(rng);
    const double a = amp(rng);
    const double s = shift(rng);
    return std::pair{k, oracle::sample_phase([=](double t) { return k * t + a * std::sin(2.0 * t + s); }, 96)};
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto [kf, f] = random_loop();
    const auto [kg, g] = random_loop();
    std::vector<cplx> fg;
    for (std::size_t i = 0; i < f.size(); ++i) fg.push_back(f[i] * g[i]);
    out.require(winding_number(f) == kf && winding_number(fg) == kf + kg, "additivity fails at trial " + std::to_string(trial));
    auto rotated = f;
    for (std::size_t r = 0; r < rotated.size(); r += 11) {
      std::rotate(rotated.begin(), rotated.begin() + 11, rotated.end());
      out.require(winding_number(rotated) == kf, "rotation changes the winding at trial " + std::to_string(trial));
    }
  }
  bool lift_failure = false;
  try {
    (void)sample_circle_power(7, 8);
  } catch (const LiftFailure&) {
    lift_failure = true;
  }
  out.require(lift_failure, "k = 7 on 8 points was not refused");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 roundtrip bijection", roundtrip_bijection},
      {"2 W_k separation", wk_separation},
      {"3 index classification", index_classification},
      {"4 morphism axiom suite", morphism_axioms},
      {"5 quotient norm", quotient_norm},
      {"6 exactness and fullness", exactness_and_fullness},
      {"7 winding algebra", winding_algebra},
  };
  const std::vector<double> budgets{30.0, 10.0, 60.0, 0.0, 0.0, 0.0, 0.0};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = criteria[i].second();
    } catch (const std::exception& e) {
      res.ok = false;
      res.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budgets[i] > 0.0 && secs > budgets[i])
      res.require(false, "runtime " + std::to_string(secs) + " s over budget " + std::to_string(budgets[i]) + " s");
    std::printf("%s [%s] %.2f s%s%s\n", res.ok ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                res.detail.empty() ? "" : " : ", res.detail.c_str());
    failures += res.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
