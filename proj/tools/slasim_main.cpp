#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slasim/scenario.hpp"

namespace fs = std::filesystem;
using namespace slasim;

namespace {

int report_errors(const std::vector<std::string>& errors, int code) {
    nlohmann::json out;
    out["ok"] = false;
    out["errors"] = errors;
    std::cerr << out.dump(2) << '\n';
    return code;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot write " + path.string());
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packet-level SLA routing simulator"};
    app.require_subcommand(1);

    std::string file;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::string seeds_text;
    unsigned parallel = 1;
    bool compare = false;
    std::string recipe_name;
    std::string emit;

    auto* validate = app.add_subcommand("validate", "Check a scenario file and report every problem");
    validate->add_option("file", file, "Scenario file")->required();

    auto* run = app.add_subcommand("run", "Run one scenario with one seed");
    run->add_option("file", file, "Scenario file")->required();
    run->add_option("--seed", seed, "Run seed")->required();
    run->add_option("--out", out_dir, "Directory for flows.csv and summary.txt");

    auto* batch = app.add_subcommand("batch", "Run one scenario over many seeds");
    batch->add_option("file", file, "Scenario file")->required();
    batch->add_option("--seeds", seeds_text, "Seeds, e.g. 1..10 or 1,4,9")->required();
    batch->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::Range(1u, 1024u));
    batch->add_flag("--compare", compare, "Pair every enhanced run with a base-only run");
    batch->add_option("--out", out_dir, "Directory for per-seed CSVs and the aggregate");

    auto* rec = app.add_subcommand("recipe", "Print or write a built-in scenario");
    rec->add_option("name", recipe_name, "Recipe name")->required();
    rec->add_option("--emit", emit, "Write the scenario to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report_errors({e.what()}, 2);
    }

    try {
        if (*validate) {
            load_scenario(file);
            std::cout << "{\"ok\": true}\n";
            return 0;
        }
        if (*run) {
            const auto config = load_scenario(file);
            const auto result = run_scenario(config, seed);
            const auto summary = summary_to_text(result.summary);
            if (out_dir.empty()) {
                std::cout << summary;
            } else {
                write_file(fs::path(out_dir) / "flows.csv", records_to_csv(result.records));
                write_file(fs::path(out_dir) / "summary.txt", summary);
                std::cout << summary;
            }
            return 0;
        }
        if (*batch) {
            const auto config = load_scenario(file);
            const auto seeds = parse_seed_list(seeds_text);
            const auto result = run_batch(config, seeds, parallel, compare);
            const auto text = batch_summary_text(result);
            if (!out_dir.empty()) {
                const fs::path dir(out_dir);
                for (const auto& r : result.runs) {
                    const std::string stem = "seed_" + std::to_string(r.seed);
                    write_file(dir / (stem + ".csv"), records_to_csv(r.result.records));
                    if (r.base) write_file(dir / (stem + "_base.csv"), records_to_csv(r.base->records));
                }
                write_file(dir / "aggregate.txt", text);
                if (compare) write_file(dir / "containment.txt", containment_text(result));
            }
            std::cout << text;
            if (compare) std::cout << containment_text(result);
            return 0;
        }
        if (*rec) {
            const auto text = serialize_scenario(recipe(recipe_name));
            if (emit.empty()) {
                std::cout << text;
            } else {
                write_file(emit, text);
            }
            return 0;
        }
    } catch (const ValidationError& e) {
        return report_errors(e.errors(), 1);
    } catch (const std::exception& e) {
        return report_errors({e.what()}, 1);
    }
    return 0;
}
