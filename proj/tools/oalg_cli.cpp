#include "oalg/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"operator-algebra toolkit"};
    std::string input = "-", out;
    std::string tol, bounds;
    std::uint64_t grid = 0, stages = 0, seed = 0;
    bool has_grid = false, has_stages = false, has_seed = false;
    app.add_option("input", input, "job document path, or - for stdin");
    app.add_option("--grid", grid, "sample grid size")->each([&](const std::string&) { has_grid = true; });
    app.add_option("--stages", stages, "stage count / cap")->each([&](const std::string&) { has_stages = true; });
    app.add_option("--tol", tol, "tolerance or comma-separated schedule");
    app.add_option("--bounds", bounds, "search bounds max_m,dict_depth,witness_scan");
    app.add_option("--seed", seed, "deterministic seed")->each([&](const std::string&) { has_seed = true; });
    app.add_option("--out", out, "report output path");
    CLI11_PARSE(app, argc, argv);

    oalg::cli::Report rep;
    try {
        std::istringstream mem;
        std::ifstream file;
        std::istream* in = &std::cin;
        if (input != "-") {
            file.open(input);
            if (!file) throw oalg::cli::ParseFailure("cannot open " + input);
            in = &file;
        }
        auto doc = oalg::cli::parse_job(*in);
        if (has_grid) doc.kv["grid"] = std::to_string(grid);
        if (has_stages) doc.kv["stages"] = std::to_string(stages);
        if (has_seed) doc.kv["seed"] = std::to_string(seed);
        if (!tol.empty()) doc.kv["tol"] = tol;
        if (!bounds.empty()) doc.kv["bounds"] = bounds;
        rep = oalg::cli::dispatch(doc);
    } catch (const std::exception& e) {
        rep.status = 2;
        rep.lines = {std::string("error=") + e.what()};
    }

    std::string text = oalg::cli::report_str(rep);
    if (out.empty()) {
        if (const char* dir = std::getenv("OALG_OUT_DIR")) out = std::string(dir) + "/report.txt";
    }
    if (!out.empty()) {
        std::ofstream of(out);
        of << text;
    }
    std::cout << text;
    return rep.status;
}
