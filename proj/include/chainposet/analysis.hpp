#pragma once

// Batch driver behind the command-line tool: builds one chain graph per
// configured resolution, runs the requested tasks and assembles a JSON report.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainposet/chaingraph.hpp"
#include "chainposet/config.hpp"
#include "chainposet/lyapunov.hpp"
#include "chainposet/model.hpp"
#include "chainposet/poset.hpp"
#include "chainposet/systems.hpp"

namespace chainposet {

using Json = nlohmann::ordered_json;

struct Level {
  std::size_t resolution = 0;
  std::optional<int> depth;
  SystemSpec spec;
  Grid grid;
  EpsilonField eps;
  Rational nominal_eps;  // the constant, or the field's maximum
  ChainGraph graph;
  ComponentPoset poset;
};

struct AnalysisReport {
  Json json;
  bool passed = true;
  std::vector<Level> levels;
};

namespace detail {

inline EpsilonField level_eps(const AnalysisConfig& cfg, const SystemSpec& spec, const Grid& grid,
                              std::optional<int> depth) {
  switch (cfg.eps_rule) {
    case EpsRule::Auto: return EpsilonField::constant(2 * grid.width());
    case EpsRule::Constant: return EpsilonField::constant(cfg.eps);
    case EpsRule::Field: return EpsilonField::piecewise_linear(cfg.eps_field);
    case EpsRule::Linking: {
      const auto* d = spec.as<DenseBlocks>();
      const Rational gap = largest_block_gap(blocks_of(spec, depth.value_or(d->depth)));
      return EpsilonField::constant(gap > 0 ? Rational(2 * gap) : Rational(2 * grid.width()));
    }
  }
  throw std::logic_error("unhandled eps rule");
}

inline Level build_level(const AnalysisConfig& cfg, const SystemSpec& spec, std::size_t resolution,
                         std::optional<int> depth) {
  Grid grid = Grid::for_domain(spec.domain(), resolution);
  EpsilonField eps = level_eps(cfg, spec, grid, depth);
  Rational nominal = eps.max_value();
  ChainGraph graph = build_chain_graph(spec, grid, eps, cfg.mode, SelfLoops::Certified, cfg.threads);
  ComponentPoset poset = chain_components(graph);
  return Level{resolution, depth, spec, std::move(grid), std::move(eps), std::move(nominal), std::move(graph),
               std::move(poset)};
}

inline Json rational_json(const Rational& q) { return to_string(q); }

inline Json interval_json(const Interval& iv) { return Json::array({to_string(iv.lo), to_string(iv.hi)}); }

inline Json components_json(const ComponentPoset& p) {
  Json out = Json::array();
  for (const auto& c : p.components()) {
    out.push_back({{"id", c.id},
                   {"first_cell", c.cells.front()},
                   {"last_cell", c.cells.back()},
                   {"cell_count", c.cells.size()},
                   {"contiguous", c.contiguous()},
                   {"representative", to_string(c.representative)},
                   {"representative_approx", to_double(c.representative)},
                   {"hull", interval_json(c.hull)}});
  }
  return out;
}

inline Json pairs_json(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Json out = Json::array();
  for (const auto& [a, b] : pairs) out.push_back(Json::array({a, b}));
  return out;
}

inline Json prediction_json(const ModelPrediction& m) {
  Json reps = Json::array();
  for (const auto& r : m.representatives) reps.push_back(to_string(r));
  Json out{{"order_type", m.order_type}};
  if (m.ordinal_type) out["ordinal"] = to_string(*m.ordinal_type);
  if (m.component_count) out["component_count"] = *m.component_count;
  out["representatives"] = std::move(reps);
  out["dense_expected"] = m.dense_expected;
  if (!m.note.empty()) out["note"] = m.note;
  return out;
}

// Largest distance from a computed representative to the nearest predicted one.
inline std::optional<Rational> prediction_deviation(const ComponentPoset& p, const ModelPrediction& m) {
  if (m.representatives.empty() || p.size() == 0) return std::nullopt;
  Rational worst = 0;
  for (const auto& c : p.components()) {
    const auto it = std::lower_bound(m.representatives.begin(), m.representatives.end(), c.representative);
    Rational best = -1;
    if (it != m.representatives.end()) best = *it - c.representative;
    if (it != m.representatives.begin()) {
      const Rational d = c.representative - *(it - 1);
      if (best < 0 || d < best) best = d;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

inline Json lyapunov_json(const LyapunovAssignment& a, const Certification& cert) {
  Json values = Json::array();
  for (std::size_t i = 0; i < a.component_values.size(); ++i)
    values.push_back({{"component", i}, {"value", to_string(a.component_values[i])}});
  Json checks = Json::array();
  for (const auto& c : cert.checks) {
    Json j{{"name", c.name}, {"passed", c.passed}, {"checked", c.checked}};
    if (!c.passed) j["witness"] = c.witness;
    checks.push_back(std::move(j));
  }
  return {{"component_values", std::move(values)},
          {"checks", std::move(checks)},
          {"equality_samples", cert.equality_samples},
          {"largest_equality_scc", cert.largest_equality_scc},
          {"escaped_samples", cert.escaped_samples},
          {"passed", cert.passed()}};
}

}  // namespace detail

/// Graphs and posets for every configured resolution (no tasks run).
inline std::vector<Level> build_levels(const AnalysisConfig& cfg) {
  std::vector<Level> out;
  for (std::size_t k = 0; k < cfg.resolutions.size(); ++k) {
    std::optional<int> depth;
    if (!cfg.depths.empty()) depth = cfg.depths[k];
    out.push_back(detail::build_level(cfg, build_system(cfg.recipe, depth), cfg.resolutions[k], depth));
  }
  return out;
}

/// Model annotation for the configured system at its first resolution.
inline Json predict_json(const AnalysisConfig& cfg) {
  const SystemSpec spec =
      cfg.depths.empty() ? build_system(cfg.recipe) : build_system(cfg.recipe, cfg.depths.front());
  const Grid grid = Grid::for_domain(spec.domain(), cfg.resolutions.front());
  Json out{{"system", describe(spec)}, {"resolution", grid.size()}};
  out["prediction"] = detail::prediction_json(predict(spec, grid.width()));
  return out;
}

/// Runs the tasks in the fixed order components, lyapunov, refine/signature,
/// conjugacy. `timing` adds wall-clock milliseconds per stage.
inline AnalysisReport run(const AnalysisConfig& cfg, bool timing = true) {
  using Clock = std::chrono::steady_clock;
  AnalysisReport report;
  Json times = Json::object();
  auto stamp = [&](const char* name, Clock::time_point since) {
    times[name] = std::chrono::duration<double, std::milli>(Clock::now() - since).count();
  };
  auto fail = [&](Json& checks, const std::string& name, bool ok) {
    checks[name] = ok;
    if (!ok) report.passed = false;
  };

  auto t0 = Clock::now();
  report.levels = build_levels(cfg);
  stamp("graphs", t0);

  Json& out = report.json;
  out["system"] = describe(report.levels.front().spec);
  out["mode"] = to_string(cfg.mode);
  Json tasks = Json::array();
  for (auto t : cfg.tasks) tasks.push_back(to_string(t));
  out["tasks"] = std::move(tasks);

  t0 = Clock::now();
  Json levels = Json::array();
  for (const Level& lv : report.levels) {
    Json j{{"resolution", lv.resolution}};
    if (lv.depth) j["depth"] = *lv.depth;
    if (lv.depth) j["system"] = describe(lv.spec);
    j["eps"] = lv.eps.is_constant() ? Json(to_string(lv.nominal_eps)) : Json("piecewise-linear");
    j["grid"] = {{"lo", to_string(lv.grid.lo())}, {"hi", to_string(lv.grid.hi())}, {"truncated", lv.grid.truncated()}};
    j["edges"] = lv.graph.edge_count();
    j["recurrent_cells"] = lv.poset.recurrent_cells().size();

    Json checks = Json::object();
    fail(checks, "recurrent_nonempty", !lv.poset.recurrent_cells().empty());
    if (!lv.grid.truncated()) {
      const auto reach = reaches_recurrent(lv.graph);
      fail(checks, "reaches_recurrent", std::all_of(reach.begin(), reach.end(), [](bool b) { return b; }));
    }

    if (cfg.has_task(Task::Components)) {
      const auto& p = lv.poset;
      j["component_count"] = p.size();
      j["components"] = detail::components_json(p);
      j["order_pairs"] = detail::pairs_json(p.order_pairs());
      Json covers = Json::array();
      for (const auto& [a, b] : hasse_covers(p)) covers.push_back(Json::array({a, b}));
      j["hasse_covers"] = std::move(covers);
      j["minimal"] = minimal_elements(p);
      j["maximal"] = maximal_elements(p);
      j["linear"] = is_linear(p);
      if (is_linear(p)) j["order_type"] = to_string(Ordinal::finite(p.size()));
      fail(checks, "minimal_nonempty", !minimal_elements(p).empty());
      fail(checks, "maximal_nonempty", !maximal_elements(p).empty());

      const ModelPrediction m = predict(lv.spec, lv.grid.width());
      Json pj = detail::prediction_json(m);
      if (m.component_count) pj["count_matches"] = *m.component_count == p.size();
      if (const auto dev = detail::prediction_deviation(p, m)) {
        pj["max_representative_deviation"] = to_string(*dev);
        pj["within_8_eps"] = *dev <= 8 * lv.nominal_eps;
      }
      j["prediction"] = std::move(pj);
    }
    j["checks"] = std::move(checks);
    levels.push_back(std::move(j));
  }
  stamp("components", t0);

  if (cfg.has_task(Task::Lyapunov)) {
    t0 = Clock::now();
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
      const Level& lv = report.levels[k];
      const auto a = synthesize(lv.graph);
      const auto cert = verify(a, lv.graph, lv.spec, cfg.samples);
      levels[k]["lyapunov"] = detail::lyapunov_json(a, cert);
      fail(levels[k]["checks"], "lyapunov", cert.passed());
    }
    stamp("lyapunov", t0);
  }
  out["levels"] = std::move(levels);

  if (cfg.has_task(Task::Refine) || cfg.has_task(Task::Signature)) {
    t0 = Clock::now();
    std::vector<TraceLevel> tl;
    for (const Level& lv : report.levels) tl.push_back({lv.grid, lv.nominal_eps, lv.poset});
    Json refine = Json::object();
    try {
      const RefinementTrace trace = make_trace(std::move(tl));
      Json matching = Json::array();
      for (const auto& m : trace.matching) {
        Json row = Json::array();
        for (const auto& x : m) row.push_back(x ? Json(*x) : Json(nullptr));
        matching.push_back(std::move(row));
      }
      refine["matching"] = std::move(matching);
      out["refinement"] = std::move(refine);

      if (cfg.has_task(Task::Signature)) {
        Json sj;
        Json checks = Json::object();
        try {
          const DensitySignature sig = density_signature(trace);
          sj["dense_growth"] = sig.dense_growth;
          sj["covers_checked"] = sig.covers_checked;
          sj["covers_refined"] = sig.covers_refined;
          sj["covers_unmatched"] = sig.covers_unmatched;
          sj["component_counts"] = sig.component_counts;
          Json pairs = Json::array();
          for (const auto& pp : sig.persistent_pairs) {
            Json gaps = Json::array();
            for (const auto& g : pp.gaps) gaps.push_back(detail::interval_json(g));
            pairs.push_back({{"lower", pp.lower},
                             {"upper", pp.upper},
                             {"lower_representative", to_string(pp.lower_representative)},
                             {"upper_representative", to_string(pp.upper_representative)},
                             {"gaps", std::move(gaps)}});
          }
          sj["persistent_pairs"] = std::move(pairs);
          const SystemSpec& base = report.levels.front().spec;
          const SystemSpec& inner = base.as<Conjugated>() ? *base.as<Conjugated>()->inner : base;
          if (inner.as<DenseBlocks>()) {
            sj["expected"] = "dense";
            fail(checks, "matches_model", sig.dense_growth && sig.persistent_pairs.empty());
          } else if (inner.as<CantorExample>()) {
            sj["expected"] = "persistent";
            fail(checks, "matches_model", !sig.dense_growth && !sig.persistent_pairs.empty());
          }
        } catch (const SignatureError& e) {
          sj["error"] = e.what();
          fail(checks, "computed", false);
        }
        sj["checks"] = std::move(checks);
        out["signature"] = std::move(sj);
      }
    } catch (const std::invalid_argument& e) {
      refine["error"] = e.what();
      out["refinement"] = std::move(refine);
      report.passed = false;
    }
    stamp("refinement", t0);
  }

  if (cfg.has_task(Task::Conjugacy)) {
    t0 = Clock::now();
    const PLHomeo h(*cfg.conjugacy);
    Json cj = Json::array();
    for (const Level& lv : report.levels) {
      const SystemSpec g = conjugate(lv.spec, h);
      const Level gl = detail::build_level(cfg, g, lv.resolution, lv.depth);
      const IsoVerdict verdict = order_isomorphic(lv.poset, gl.poset);
      Json j{{"resolution", lv.resolution},
             {"system", describe(g)},
             {"components", lv.poset.size()},
             {"conjugate_components", gl.poset.size()},
             {"verdict", to_string(verdict)}};
      if (is_linear(lv.poset) && is_linear(gl.poset) && lv.poset.size() == gl.poset.size()) {
        // Pair components along the chains; a decreasing h reverses the order.
        auto fs = linear_sequence(lv.poset);
        const auto gs = linear_sequence(gl.poset);
        if (!h.increasing()) std::reverse(fs.begin(), fs.end());
        Rational worst = 0;
        for (std::size_t i = 0; i < fs.size(); ++i)
          worst = std::max(worst, abs(Rational(gl.poset.component(gs[i]).representative -
                                               h.apply(lv.poset.component(fs[i]).representative))));
        j["max_representative_shift"] = to_string(worst);
      }
      Json checks = Json::object();
      fail(checks, "isomorphic", verdict == IsoVerdict::Isomorphic);
      j["checks"] = std::move(checks);
      cj.push_back(std::move(j));
    }
    out["conjugacy"] = std::move(cj);
    stamp("conjugacy", t0);
  }

  out["passed"] = report.passed;
  if (timing) out["timing_ms"] = std::move(times);
  return report;
}

/// Writes one DOT file per level into `dir`; returns the paths written.
inline std::vector<std::string> write_dot_files(const std::vector<Level>& levels, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto path =
        (std::filesystem::path(dir) / ("level" + std::to_string(k) + "_n" + std::to_string(levels[k].resolution) +
                                       ".dot"))
            .string();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_dot(levels[k].poset, os, "level" + std::to_string(k));
    paths.push_back(path);
  }
  return paths;
}

}  // namespace chainposet
