// Command-line front end: generate test problems, run the block Krylov
// eigensolvers, emit JSON reports and CSV convergence histories, and validate
// computed eigenvalues against analytic or dense oracles.
//
// Exit codes: 0 converged / success, 2 solver finished without converging,
// 1 any error (bad flags, I/O, invalid configuration).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "spectral_krylov/spectral_krylov.hpp"
#include "spectral_krylov/report_json.hpp"
#include "spectral_krylov/util/log.hpp"

namespace {

using namespace spk;

struct GenSpec {
    std::string name;
    std::map<std::string, std::string> args;
};

GenSpec parse_gen_spec(const std::string& text) {
    GenSpec spec;
    const auto colon = text.find(':');
    spec.name = text.substr(0, colon);
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            auto comma = rest.find(',', pos);
            if (comma == std::string::npos) comma = rest.size();
            const std::string kv = rest.substr(pos, comma - pos);
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--gen: expected key=value, got '" + kv + "'");
            spec.args[kv.substr(0, eq)] = kv.substr(eq + 1);
            pos = comma + 1;
        }
    }
    return spec;
}

long long spec_int(const GenSpec& g, const std::string& key) {
    const auto it = g.args.find(key);
    if (it == g.args.end()) throw std::runtime_error("--gen " + g.name + ": missing key '" + key + "'");
    return std::stoll(it->second);
}

double spec_real(const GenSpec& g, const std::string& key, double fallback) {
    const auto it = g.args.find(key);
    return it == g.args.end() ? fallback : std::stod(it->second);
}

void reject_unknown_keys(const GenSpec& g, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : g.args) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw std::runtime_error("--gen " + g.name + ": unknown key '" + key + "'");
    }
}

GeneratedProblem build_generated(const GenSpec& g, std::uint64_t seed, bool scaled) {
    if (g.name == "laplacian2d") {
        reject_unknown_keys(g, {"N"});
        const long long n_grid = spec_int(g, "N");
        if (n_grid < 1) throw std::runtime_error("--gen laplacian2d: N must be >= 1");
        return gen_laplacian2d(std::size_t(n_grid), scaled);
    }
    if (g.name == "spaced") {
        reject_unknown_keys(g, {"n", "max", "min"});
        const long long n = spec_int(g, "n");
        if (n < 1) throw std::runtime_error("--gen spaced: n must be >= 1");
        const double hi = spec_real(g, "max", 10.0);
        const double lo = spec_real(g, "min", 1.0);
        return gen_spaced_diagonalizable(std::size_t(n), hi, lo, seed);
    }
    throw std::runtime_error("--gen: unknown generator '" + g.name + "'");
}

/// Exact spectrum without materializing the operator.
std::vector<std::complex<double>> exact_values(const GenSpec& g, bool scaled) {
    if (g.name == "laplacian2d") {
        reject_unknown_keys(g, {"N"});
        const long long n_grid = spec_int(g, "N");
        if (n_grid < 1) throw std::runtime_error("--gen laplacian2d: N must be >= 1");
        auto all = laplacian_exact_eigs(std::size_t(n_grid), std::size_t(n_grid * n_grid));
        const double f = scaled ? double((n_grid + 1) * (n_grid + 1)) : 1.0;
        std::vector<std::complex<double>> out;
        for (double v : all) out.emplace_back(v * f, 0.0);
        return out;
    }
    if (g.name == "spaced") {
        reject_unknown_keys(g, {"n", "max", "min"});
        const long long n = spec_int(g, "n");
        if (n < 1) throw std::runtime_error("--gen spaced: n must be >= 1");
        const double hi = spec_real(g, "max", 10.0);
        const double lo = spec_real(g, "min", 1.0);
        std::vector<std::complex<double>> out;
        for (long long i = 0; i < n; ++i)
            out.emplace_back(n == 1 ? hi : hi - (hi - lo) * double(i) / double(n - 1), 0.0);
        return out;
    }
    throw std::runtime_error("--gen: unknown generator '" + g.name + "'");
}

void write_spectrum_csv(const std::string& path, const std::vector<std::complex<double>>& values) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write --spectrum file '" + path + "'");
    out << "index,re,im\n";
    char buf[128];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, values[i].real(), values[i].imag());
        out << buf;
    }
}

void write_history_csv(const std::string& path, const SolveReport& rep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write --history file '" + path + "'");
    out << "restart,max_residual,block_estimate\n";
    char buf[128];
    for (const auto& rec : rep.records) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", rec.restart_index, rec.max_residual,
                      rec.block_residual_estimate);
        out << buf;
    }
}

struct CommonFlags {
    std::string matrix_path;
    std::string gen_text;
    std::string method_name = "able-cheb";
    std::size_t s = 1, m = 10, k = 10, restarts = 10, threads = 1;
    double tol = 1e-8, breakdown_tol = 1e-10;
    std::uint64_t seed = 0;
    bool scaled = false;
};

void add_problem_flags(CLI::App* cmd, CommonFlags& f) {
    auto* matrix = cmd->add_option("--matrix", f.matrix_path, "Matrix Market file to read");
    auto* gen = cmd->add_option("--gen", f.gen_text,
                                "problem generator, e.g. laplacian2d:N=50 or spaced:n=500,max=10,min=1");
    matrix->excludes(gen);
    gen->excludes(matrix);
    cmd->add_flag("--scaled", f.scaled, "scale the Laplacian stencil by 1/h^2");
    cmd->add_option("--seed", f.seed, "seed for every pseudorandom draw");
}

void add_solver_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--method", f.method_name, "block-lanczos | able | block-lanczos-cheb | able-cheb");
    cmd->add_option("--s", f.s, "number of wanted eigenvalues");
    cmd->add_option("--m", f.m, "Lanczos steps per cycle");
    cmd->add_option("--k", f.k, "Chebyshev filter degree");
    cmd->add_option("--restarts", f.restarts, "maximum number of restarts");
    cmd->add_option("--tol", f.tol, "relative residual tolerance");
    cmd->add_option("--breakdown-tol", f.breakdown_tol, "breakdown tolerance");
    cmd->add_option("--threads", f.threads,
                    "parallelize matvec columns (>1 waives bitwise history reproducibility)");
}

struct Problem {
    LinearOperator op;
    std::optional<Spectrum> exact;
};

Problem load_problem(const CommonFlags& f) {
    if (!f.matrix_path.empty()) {
        return Problem{read_matrix_market(f.matrix_path).with_threads(f.threads), std::nullopt};
    }
    if (f.gen_text.empty()) throw std::runtime_error("one of --matrix or --gen is required");
    auto gen = build_generated(parse_gen_spec(f.gen_text), f.seed, f.scaled);
    return Problem{gen.op.with_threads(f.threads), std::move(gen.exact_spectrum)};
}

SolverConfig make_config(const CommonFlags& f) {
    SolverConfig cfg;
    const auto method = parse_method(f.method_name);
    if (!method) throw std::runtime_error("--method: unknown method '" + f.method_name + "'");
    cfg.method = *method;
    cfg.s = f.s;
    cfg.m = f.m;
    cfg.k = f.k;
    cfg.max_restarts = f.restarts;
    cfg.tol = f.tol;
    cfg.breakdown_tol = f.breakdown_tol;
    cfg.seed = f.seed;
    return cfg;
}

int cmd_solve(const CommonFlags& f, const std::string& out_path, const std::string& history_path) {
    const Problem problem = load_problem(f);
    const SolverConfig cfg = make_config(f);
    if (f.threads > 1)
        SPK_LOG_ERROR("--threads %zu: histories are not guaranteed bitwise reproducible across "
                      "thread counts",
                      f.threads);
    const SolveReport rep = solve(problem.op, cfg);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write --out file '" + out_path + "'");
        out << report_to_json(rep).dump(2) << "\n";
    }
    if (!history_path.empty()) write_history_csv(history_path, rep);

    std::printf("%s: n=%zu s=%zu m=%zu k=%zu restarts=%zu converged=%s\n",
                method_name(cfg.method), rep.n, cfg.s, cfg.m, cfg.k, rep.restarts_performed,
                rep.converged ? "yes" : "no");
    for (std::size_t i = 0; i < rep.final.values.size(); ++i)
        std::printf("  lambda_%zu = %.12g %+.12gi   residual %.3e\n", i + 1,
                    rep.final.values[i].real(), rep.final.values[i].imag(),
                    rep.final.per_pair_residuals[i]);
    if (!rep.diagnostic.empty()) std::printf("diagnostic: %s\n", rep.diagnostic.c_str());
    return rep.converged ? 0 : 2;
}

int cmd_generate(const CommonFlags& f, const std::string& out_path, const std::string& spectrum_path) {
    if (f.gen_text.empty()) throw std::runtime_error("generate requires --gen");
    if (out_path.empty()) throw std::runtime_error("generate requires --out");
    const GenSpec spec = parse_gen_spec(f.gen_text);
    const auto gen = build_generated(spec, f.seed, f.scaled);
    write_matrix_market(out_path, gen.op);
    if (!spectrum_path.empty()) {
        if (!gen.exact_spectrum) throw std::runtime_error("--spectrum: exact spectrum unknown for this generator");
        write_spectrum_csv(spectrum_path, gen.exact_spectrum->values);
    }
    std::printf("wrote %s (n=%zu, %s)\n", out_path.c_str(), gen.op.dim(), gen.description.c_str());
    return 0;
}

int cmd_exact(const CommonFlags& f, const std::string& spectrum_path, std::size_t count) {
    if (f.gen_text.empty()) throw std::runtime_error("exact requires --gen");
    auto values = exact_values(parse_gen_spec(f.gen_text), f.scaled);
    if (count > 0 && count < values.size()) values.resize(count);
    if (!spectrum_path.empty()) {
        write_spectrum_csv(spectrum_path, values);
    } else {
        std::printf("index,re,im\n");
        for (std::size_t i = 0; i < values.size(); ++i)
            std::printf("%zu,%.17g,%.17g\n", i + 1, values[i].real(), values[i].imag());
    }
    return 0;
}

int cmd_validate(const CommonFlags& f) {
    const Problem problem = load_problem(f);
    const SolverConfig cfg = make_config(f);

    std::vector<std::complex<double>> oracle;
    if (problem.exact) {
        oracle = problem.exact->values;
    } else {
        if (problem.op.dim() > 2000)
            throw std::runtime_error("validate: n exceeds the dense oracle budget (2000)");
        oracle = eig_values(problem.op.to_dense()).values;
    }

    const SolveReport rep = solve(problem.op, cfg);
    std::printf("index, exact, computed, abs_error, residual\n");
    for (std::size_t i = 0; i < rep.final.values.size() && i < oracle.size(); ++i) {
        const double err = std::abs(rep.final.values[i] - oracle[i]);
        std::printf("%zu, %.10g, %.10g, %.3e, %.3e\n", i + 1, oracle[i].real(),
                    rep.final.values[i].real(), err, rep.final.per_pair_residuals[i]);
    }
    if (!rep.diagnostic.empty()) std::printf("diagnostic: %s\n", rep.diagnostic.c_str());
    return rep.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-krylov: block Krylov eigensolvers for rightmost eigenvalues"};
    app.require_subcommand(1);

    CommonFlags f;
    std::string out_path, history_path, spectrum_path;
    std::size_t exact_count = 0;

    auto* solve_cmd = app.add_subcommand("solve", "run a solver and report the wanted eigenpairs");
    add_problem_flags(solve_cmd, f);
    add_solver_flags(solve_cmd, f);
    solve_cmd->add_option("--out", out_path, "JSON report path");
    solve_cmd->add_option("--history", history_path, "CSV convergence history path");

    auto* gen_cmd = app.add_subcommand("generate", "write a generated problem in Matrix Market form");
    add_problem_flags(gen_cmd, f);
    gen_cmd->add_option("--out", out_path, "Matrix Market output path");
    gen_cmd->add_option("--spectrum", spectrum_path, "also write the exact spectrum as CSV");

    auto* exact_cmd = app.add_subcommand("exact", "print or write the exact spectrum of a generator");
    add_problem_flags(exact_cmd, f);
    exact_cmd->add_option("--spectrum", spectrum_path, "CSV output path (default: stdout)");
    exact_cmd->add_option("--count", exact_count, "emit only the largest count values");

    auto* val_cmd = app.add_subcommand("validate", "solve and compare against the exact/dense oracle");
    add_problem_flags(val_cmd, f);
    add_solver_flags(val_cmd, f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return cmd_solve(f, out_path, history_path);
        if (gen_cmd->parsed()) return cmd_generate(f, out_path, spectrum_path);
        if (exact_cmd->parsed()) return cmd_exact(f, spectrum_path, exact_count);
        if (val_cmd->parsed()) return cmd_validate(f);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
