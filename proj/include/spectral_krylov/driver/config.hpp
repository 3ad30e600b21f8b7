#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectral_krylov/lanczos/ritz.hpp"

namespace spk {

enum class Method { block_lanczos, able, block_lanczos_cheb, able_cheb };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::block_lanczos: return "block-lanczos";
        case Method::able: return "able";
        case Method::block_lanczos_cheb: return "block-lanczos-cheb";
        case Method::able_cheb: return "able-cheb";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& name) {
    if (name == "block-lanczos") return Method::block_lanczos;
    if (name == "able") return Method::able;
    if (name == "block-lanczos-cheb") return Method::block_lanczos_cheb;
    if (name == "able-cheb") return Method::able_cheb;
    return std::nullopt;
}

inline bool is_filtered(Method m) {
    return m == Method::block_lanczos_cheb || m == Method::able_cheb;
}

inline bool is_adaptive(Method m) { return m == Method::able || m == Method::able_cheb; }

struct SolverConfig {
    std::size_t s = 1;             // wanted eigenvalue count
    std::size_t m = 10;            // Lanczos steps per cycle
    std::size_t k = 10;            // Chebyshev degree (filtered methods)
    std::size_t max_restarts = 10;
    double tol = 1e-8;             // relative residual tolerance
    double breakdown_tol = 1e-10;
    std::uint64_t seed = 0;
    Method method = Method::able_cheb;
    bool full_rebiorth = false;       // diagnostic two-sided re-biorthogonalization
    bool keep_restart_blocks = false; // diagnostic: snapshot V1 at each restart

    void validate(std::size_t n) const {
        if (s < 1) throw std::invalid_argument("config: s must be >= 1");
        if (m < 1) throw std::invalid_argument("config: m must be >= 1");
        if (m * s > n) throw std::invalid_argument("config: m*s must not exceed n");
        if (!(tol > 0)) throw std::invalid_argument("config: tol must be positive");
        if (!(breakdown_tol > 0)) throw std::invalid_argument("config: breakdown-tol must be positive");
        if (is_filtered(method) && k < 1)
            throw std::invalid_argument("config: k must be >= 1 for filtered methods");
    }
};

/// One restart cycle's worth of convergence data. Residuals here are
/// relative, ||A z - mu z||_2 / max(1, |mu|), matching the stopping rule;
/// the final RitzSet carries the raw 2-norms.
struct ConvergenceRecord {
    std::size_t restart_index = 0;  // 0 is the initial cycle
    std::vector<std::complex<double>> ritz_values;
    std::vector<double> per_pair_residuals;
    double max_residual = 0;
    double block_residual_estimate = 0;
    std::size_t breakdown_events = 0;
    bool widened = false;          // conjugate pair straddled the s boundary
    bool filtered = false;         // Chebyshev filter applied after this cycle
    bool stagnation_kick = false;  // restart block perturbed
    std::size_t rejected_spurious = 0;  // oblique artifacts screened out
    double ellipse_d = 0;
    double ellipse_c2 = 0;
};

/// Full outcome of a solve. Operator applications are counted in columns
/// (one n-vector apply each), A and A^T separately, and also per phase:
///   applies_lanczos   = sum over cycles of 2 * m_eff * block_width,
///   applies_chebyshev = sum over filtered restarts of k * block_width,
///   applies_residual  = one apply per distinct Ritz pair and cycle
///                       (a complex pair costs two columns, shared with its
///                        conjugate).
/// applies_a + applies_at = applies_lanczos + applies_chebyshev + applies_residual.
struct SolveReport {
    SolverConfig config;
    std::size_t n = 0;
    bool converged = false;
    std::vector<ConvergenceRecord> records;
    RitzSet final;  // the s wanted pairs of the last cycle
    double wall_time_s = 0;
    std::size_t restarts_performed = 0;
    long long applies_a = 0;
    long long applies_at = 0;
    long long applies_lanczos = 0;
    long long applies_chebyshev = 0;
    long long applies_residual = 0;
    std::size_t recovery_events = 0;
    std::string diagnostic;  // nonempty when the run stopped on an error path
    std::vector<DenseMatrix> restart_blocks;  // only with keep_restart_blocks
};

}  // namespace spk
