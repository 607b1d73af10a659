// tanprime: command-line front end.
//
// Exit codes: 0 success, 1 a verification criterion failed, 2 invalid input or
// budget exceeded, 3 I/O failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tanprime/battery.hpp"
#include "tanprime/harness.hpp"

namespace {

using namespace tanprime;

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_invalid = 2;
constexpr int exit_io = 3;

struct ProblemFlags {
    double c = 0.0;
    double theta = 0.0;
    std::optional<long> m;
    std::optional<double> n;

    void attach(CLI::App& app) {
        app.add_option("--c", c, "exponent c in (1, 10/9)")->required();
        app.add_option("--theta", theta, "tangent power theta > 1")->required();
        auto* mo = app.add_option("--m", m, "window index m >= 0");
        auto* no = app.add_option("--N", n, "target N > 0 (snapped to the nearest window)");
        mo->excludes(no);
    }

    ProblemConfig config() const {
        if (m) return {c, theta, WindowIndex{*m}};
        if (n) return {c, theta, TargetN{*n}};
        fail(error_kind::validation, "one of --m or --N is required");
    }
};

// Opens `path` for writing, or returns null when no path was given.
std::unique_ptr<std::ofstream> open_output(const std::string& path) {
    if (path.empty()) return nullptr;
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*out) fail(error_kind::io, "cannot open " + path + " for writing");
    return out;
}

void close_output(std::unique_ptr<std::ofstream>& out, const std::string& path) {
    if (!out) return;
    out->flush();
    if (!*out) fail(error_kind::io, "write to " + path + " failed");
    out.reset();
}

void emit(const json& doc, const std::string& report_path) {
    if (report_path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    auto out = open_output(report_path);
    *out << doc.dump(2) << '\n';
    close_output(out, report_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scales, prime windows, exponential sums and witness search for the tangent-power inequality"};
    app.set_config("--config", "", "read flags from a TOML/INI file (flags on the command line win)");
    app.require_subcommand(1);

    bool verbose = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_flag("-v,--verbose", verbose, "progress on standard error");
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));

    auto* derive = app.add_subcommand("derive", "print the derived scales and window geometry as JSON");
    ProblemFlags derive_flags;
    derive_flags.attach(*derive);

    auto* sieve = app.add_subcommand("sieve", "list the primes of the window with log weights and phases");
    ProblemFlags sieve_flags;
    sieve_flags.attach(*sieve);
    std::string sieve_out;
    std::size_t max_segments = SieveOptions{}.max_segments;
    sieve->add_option("--out", sieve_out, "prime table CSV");
    sieve->add_option("--max-segments", max_segments, "sieve segment budget");

    auto* kernel = app.add_subcommand("kernel", "sample the smoothing kernel and its Fourier transform");
    double kernel_eps = 0.0;
    int kernel_k = 0;
    std::size_t kernel_samples = 1001;
    std::size_t kernel_sweep = 1000;
    std::string psi_out;
    std::string fourier_out;
    kernel->add_option("--epsilon", kernel_eps, "support half-width")->required();
    kernel->add_option("--k", kernel_k, "smoothness order")->required();
    kernel->add_option("--samples", kernel_samples, "psi samples on [-eps, eps]")->check(CLI::PositiveNumber);
    kernel->add_option("--sweep", kernel_sweep, "log-spaced Fourier samples")->check(CLI::PositiveNumber);
    kernel->add_option("--psi-out", psi_out, "CSV of (y, psi)");
    kernel->add_option("--out,--fourier-out", fourier_out, "CSV of (x, Psi, bound)");

    auto* expsum = app.add_subcommand("expsum", "S and I on the major arc, A(t) profile, mean squares");
    ProblemFlags expsum_flags;
    expsum_flags.attach(*expsum);
    ExpsumOptions expsum_options;
    std::string alpha_out;
    std::string integer_out;
    expsum->add_option("--grid", expsum_options.grid_size, "alpha grid size over [-tau, tau]")
        ->check(CLI::Range(std::size_t{3}, std::size_t{1} << 24));
    expsum->add_option("--integer-points", expsum_options.integer_points, "points of the A(t) profile");
    expsum->add_flag("--mean-square", expsum_options.mean_square, "also integrate |S|^2 and |I|^2");
    expsum->add_option("--out", alpha_out, "CSV of (alpha, S, I, deviation)");
    expsum->add_option("--integer-out", integer_out, "CSV of (t, |A(t)|, bound)");

    auto* search = app.add_subcommand("search", "find witness triples and compute the weighted counts");
    ProblemFlags search_flags;
    search_flags.attach(*search);
    SearchOptions search_options;
    std::string witness_out;
    std::string report_out;
    search->add_option("--eps", search_options.epsilon, "tolerance (default: the scale epsilon)");
    search->add_option("--k", search_options.kernel_k, "kernel order (default: ceil(log X))");
    search->add_flag("--integral", search_options.integral, "also compute the smoothed count by integration");
    search->add_flag("--full-line", search_options.grid.full_line,
                     "with --integral, extend the integration until the kernel tail is negligible");
    search->add_option("--nodes-per-revolution", search_options.grid.nodes_per_revolution);
    search->add_option("--max-nodes", search_options.grid.max_nodes, "quadrature node budget");
    search->add_option("--max-segments", search_options.sieve.max_segments, "sieve segment budget");
    search->add_option("--out,--witness-out", witness_out, "witness store (JSON lines)");
    search->add_option("--report", report_out, "write the JSON report here instead of standard output");

    auto* scaling = app.add_subcommand("scaling", "weighted count against eps X^(3-c) over several windows");
    double scaling_c = 0.0;
    double scaling_theta = 0.0;
    std::vector<long> m_list;
    std::string scaling_out;
    scaling->add_option("--c", scaling_c)->required();
    scaling->add_option("--theta", scaling_theta)->required();
    scaling->add_option("--m-list", m_list, "window indices")->required()->delimiter(',');
    scaling->add_option("--out", scaling_out, "trend CSV");

    auto* verify = app.add_subcommand("verify", "run the verification battery");
    bool quick = false;
    bool negate_epsilon = false;
    std::vector<int> only;
    verify->add_flag("--quick", quick, "cheap criteria only");
    verify->add_option("--criterion", only, "run only these criteria")->check(CLI::Range(1, criterion_count));
    verify->add_flag("--fault-negate-epsilon", negate_epsilon)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    const Exec exec{threads};
    auto progress = [&](const std::string& what) {
        if (verbose) std::cerr << what << std::endl;
    };

    try {
        if (*derive) {
            emit(derive_document(derive_flags.config()), "");
        } else if (*sieve) {
            SieveOptions options;
            options.max_segments = max_segments;
            options.exec = exec;
            progress("sieving");
            auto out = open_output(sieve_out);
            const json doc = sieve_document(sieve_flags.config(), options, out.get());
            close_output(out, sieve_out);
            emit(doc, "");
        } else if (*kernel) {
            auto psi = open_output(psi_out);
            auto fourier = open_output(fourier_out);
            const json doc = kernel_document(kernel_eps, kernel_k, kernel_samples, kernel_sweep, psi.get(),
                                             fourier.get());
            close_output(psi, psi_out);
            close_output(fourier, fourier_out);
            emit(doc, "");
        } else if (*expsum) {
            expsum_options.exec = exec;
            auto alpha = open_output(alpha_out);
            auto integer = open_output(integer_out);
            std::ostringstream discard;
            progress("evaluating S and I on the major arc");
            const json doc = expsum_document(expsum_flags.config(), expsum_options,
                                             alpha ? static_cast<std::ostream&>(*alpha) : discard, integer.get());
            close_output(alpha, alpha_out);
            close_output(integer, integer_out);
            emit(doc, "");
        } else if (*search) {
            search_options.exec = exec;
            auto witnesses = open_output(witness_out);
            progress("searching");
            const json doc = search_document(search_flags.config(), search_options, witnesses.get());
            close_output(witnesses, witness_out);
            emit(doc, report_out);
        } else if (*scaling) {
            auto out = open_output(scaling_out);
            const json doc = scaling_document({scaling_c, scaling_theta, WindowIndex{0}}, m_list, exec, out.get());
            close_output(out, scaling_out);
            emit(doc, "");
        } else if (*verify) {
            if (negate_epsilon) {
                DerivedScales s = scales_for_window(reference::c, reference::theta, reference::m);
                s.epsilon = -s.epsilon;
                validate(s, reference::c);
            }
            std::vector<int> ids = only;
            if (ids.empty() && quick) ids = quick_criteria();
            if (ids.empty()) {
                for (int i = 1; i <= criterion_count; ++i) ids.push_back(i);
            }
            BatteryOptions options;
            options.exec = exec;
            options.progress = verbose ? &std::cerr : nullptr;
            std::vector<int> failed;
            for (int id : ids) {
                const CriterionResult r = run_criterion(id, options);
                std::cout << format_result(r) << std::endl;
                if (!r.passed) failed.push_back(id);
            }
            if (!failed.empty()) {
                std::cout << "failed criteria:";
                for (int id : failed) std::cout << ' ' << id;
                std::cout << '\n';
                return exit_failed;
            }
            std::cout << "all " << ids.size() << " criteria passed\n";
        }
    } catch (const tanprime::error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return e.kind() == error_kind::io ? exit_io : exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_ok;
}
