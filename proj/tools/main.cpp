#include "itslb/analysis.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace itslb;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_one(const fs::path& path, const AnalysisOptions& opts, const std::string& format,
            const std::string& proof_path, bool validate) {
    Program prog;
    try {
        prog = parse_program(read_file(path));
    } catch (const SyntaxError& e) {
        std::cerr << path.string() << ": " << e.what() << "\n";
        return 2;
    } catch (const SemanticError& e) {
        std::cerr << path.string() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << path.string() << ": " << e.what() << "\n";
        return 2;
    }

    AnalysisResult res = analyze(prog, opts);
    if (format == "json")
        std::cout << result_json(res) << "\n";
    else
        std::cout << result_text(res);

    if (!proof_path.empty()) {
        std::ofstream out(proof_path);
        out << (format == "json" ? render_proof_json(res.pipeline, res.bound)
                                 : render_proof_text(res.pipeline, res.bound));
    }
    if (validate) {
        RunBudget budget;
        budget.max_steps = 400;
        auto points = validate_bound(prog, res, 3, budget);
        for (const auto& p : points) {
            std::cout << "validate: claimed " << p.claimed << ", oracle " << p.observed
                      << (p.truncated ? " (truncated)" : "") << " -> "
                      << (p.ok ? "ok" : "MISMATCH") << "\n";
        }
        if (points.empty()) std::cout << "validate: no guard model found in the sample window\n";
    }
    return res.timed_out ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Worst-case lower bounds for integer transition systems"};
    std::string input;
    AnalysisOptions opts;
    double timeout_s = 60.0;
    std::string format = "text";
    std::string proof_path;
    bool validate = false;

    app.add_option("input", input, "ITS file or directory of .its files")->required();
    app.add_option("--timeout", timeout_s, "whole-run timeout in seconds (default 60)");
    app.add_option("--smt-timeout", opts.smt_timeout_ms, "per-query SMT timeout in ms");
    app.add_option("--smt-solver", opts.smt_solver,
                   "external SMT-LIB2 solver command (reads stdin), e.g. \"z3 -in\"");
    app.add_option("--max-rules", opts.max_rules, "rule cap during simplification");
    app.add_option("--depth-cap", opts.depth_cap, "limit-calculus search depth");
    app.add_option("--proof", proof_path, "write the proof/explanation to this file");
    app.add_flag("--validate", validate, "cross-check the bound with the exhaustive oracle");
    app.add_option("--format", format, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));

    CLI11_PARSE(app, argc, argv);

    if (opts.smt_solver.empty())
        if (const char* env = std::getenv("ITSLB_SMT_SOLVER")) opts.smt_solver = env;
    opts.timeout_ms = static_cast<int>(timeout_s * 1000);
    if (opts.timeout_ms <= 0) {
        std::cerr << "timeout must be positive\n";
        return 2;
    }

    fs::path in(input);
    if (fs::is_directory(in)) {
        int worst = 0;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(in))
            if (e.path().extension() == ".its") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::cout << "== " << f.filename().string() << "\n";
            worst = std::max(worst, run_one(f, opts, format, "", false));
        }
        return worst;
    }
    return run_one(in, opts, format, proof_path, validate);
}
