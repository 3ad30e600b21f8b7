#pragma once

#include <json.hpp>

#include "spectral_krylov/driver/config.hpp"

namespace spk {

/// JSON serialization of a SolveReport. Field names are part of the report
/// schema; floating-point values round-trip at full precision via the
/// shortest-representation dumping of the JSON library.
inline nlohmann::json report_to_json(const SolveReport& r) {
    nlohmann::json j;
    j["method"] = method_name(r.config.method);
    j["n"] = r.n;
    j["s"] = r.config.s;
    j["m"] = r.config.m;
    j["k"] = r.config.k;
    j["tol"] = r.config.tol;
    j["breakdown_tol"] = r.config.breakdown_tol;
    j["max_restarts"] = r.config.max_restarts;
    j["restarts_performed"] = r.restarts_performed;
    j["converged"] = r.converged;
    j["seed"] = r.config.seed;
    j["wall_time_s"] = r.wall_time_s;
    j["recovery_events"] = r.recovery_events;
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;

    nlohmann::json ritz = nlohmann::json::array();
    for (std::size_t i = 0; i < r.final.values.size(); ++i) {
        ritz.push_back({{"re", r.final.values[i].real()},
                        {"im", r.final.values[i].imag()},
                        {"residual", r.final.per_pair_residuals[i]}});
    }
    j["ritz"] = ritz;

    nlohmann::json hist = nlohmann::json::array();
    for (const auto& rec : r.records) {
        nlohmann::json h;
        h["restart"] = rec.restart_index;
        h["max_residual"] = rec.max_residual;
        h["block_estimate"] = rec.block_residual_estimate;
        h["breakdown_events"] = rec.breakdown_events;
        h["widened"] = rec.widened;
        h["filtered"] = rec.filtered;
        h["stagnation_kick"] = rec.stagnation_kick;
        h["rejected_spurious"] = rec.rejected_spurious;
        if (rec.filtered) {
            h["ellipse_d"] = rec.ellipse_d;
            h["ellipse_c2"] = rec.ellipse_c2;
        }
        hist.push_back(std::move(h));
    }
    j["history"] = hist;

    j["operator_applications"] = {
        {"a", r.applies_a},
        {"at", r.applies_at},
        {"lanczos", r.applies_lanczos},
        {"chebyshev", r.applies_chebyshev},
        {"residual", r.applies_residual},
        {"formula",
         "a+at = lanczos + chebyshev + residual; lanczos = sum over cycles of 2*m_eff*width; "
         "chebyshev = sum over filtered restarts of k*width; residual = one column per distinct "
         "Ritz pair per cycle (two for a complex pair, shared with its conjugate)"}};
    return j;
}

}  // namespace spk
