// pgl: command-line surface over the library. Reports go to --out or stdout,
// wall time and node counts to stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pgl/errors.hpp"
#include "pgl/exec.hpp"
#include "pgl/report.hpp"

namespace rep = pgl::report;

namespace {

struct Globals {
    std::optional<std::uint64_t> budget;
    std::optional<int> threads;
    std::string out;
    std::string format = "json";
};

std::optional<std::uint64_t> env_u64(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (*end != '\0' || x == 0) throw pgl::InputError(fmt::format("{} must be a positive integer", name));
    return x;
}

rep::CommonOptions resolve(const Globals& g) {
    rep::CommonOptions o;
    if (auto b = g.budget ? g.budget : env_u64("PGL_BUDGET")) o.budget = *b;
    int threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    if (g.threads)
        threads = *g.threads;
    else if (auto t = env_u64("PGL_THREADS"))
        threads = static_cast<int>(*t);
    pgl::set_thread_count(threads);
    return o;
}

rep::StructureSpec load_structure(const std::string& structure, const std::string& poset_path,
                                  const std::string& mode, int d) {
    rep::StructureSpec spec;
    if (structure == "poset") {
        if (poset_path.empty()) throw pgl::InputError("--poset FILE is required for poset structures");
        const std::string bytes = rep::read_file(poset_path);
        rep::Json doc;
        try {
            doc = rep::Json::parse(bytes);
        } catch (const rep::Json::exception& e) {
            throw pgl::InputError(poset_path + ": " + e.what());
        }
        spec.poset = rep::poset_from_json(doc);
        spec.poset_name = doc.value("name", std::filesystem::path(poset_path).stem().string());
        spec.poset_hash = rep::fnv1a_hex(bytes);
        spec.mode = pgl::parse_copy_mode(mode);
    } else if (structure == "boolean-algebra") {
        spec.kind = rep::StructureSpec::Kind::boolean_algebra;
        spec.d = d;
    } else if (structure == "join") {
        spec.kind = rep::StructureSpec::Kind::join;
    } else {
        throw pgl::InputError("unknown structure '" + structure + "'");
    }
    return spec;
}

int emit(const rep::Report& r, const Globals& g) {
    const std::string body = g.format == "csv" ? rep::to_csv(r) : rep::to_json(r);
    if (g.out.empty())
        std::cout << body;
    else
        rep::write_file(g.out, body);
    std::cerr << fmt::format("{}: {:.3f}s, {} search nodes, exit {}\n", r.command, r.wall_seconds, r.nodes,
                             static_cast<int>(r.status));
    return static_cast<int>(r.status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forbidden induced subposets in grids: widths, partitions, extremal searches, detection"};
    app.require_subcommand(1);
    Globals g;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--budget", g.budget, "Search node budget (env PGL_BUDGET)")->check(CLI::PositiveNumber);
        sub->add_option("--threads", g.threads, "Worker threads (env PGL_THREADS)")->check(CLI::PositiveNumber);
        sub->add_option("--out", g.out, "Write the report here instead of stdout");
        sub->add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    };

    std::string shape_text, poset_path, mode = "weak", structure = "poset", family_path, suite_path,
                                         partition_mode = "chains", partition_path, archive;
    int d = 1;

    auto* width = app.add_subcommand("width", "Width of a grid with the k^(n-1)/sqrt(n) estimate");
    width->add_option("--shape", shape_text, "Sides, e.g. 2,2,2")->required();
    add_common(width);

    auto* partition = app.add_subcommand("partition", "Long-chain or product-of-chains partition");
    partition->add_option("--shape", shape_text, "Sides")->required();
    partition->add_option("--mode", partition_mode, "chains or grids")->check(CLI::IsMember({"chains", "grids"}));
    partition->add_option("--d", d, "Number of factors for --mode grids")->check(CLI::PositiveNumber);
    partition->add_option("--partition-out", partition_path, "Write the partition document here");
    add_common(partition);

    auto* extremal = app.add_subcommand("extremal", "Largest family avoiding a structure");
    extremal->add_option("--shape", shape_text, "Sides")->required();
    extremal->add_option("--structure", structure, "poset, boolean-algebra or join")
        ->check(CLI::IsMember({"poset", "boolean-algebra", "join"}));
    extremal->add_option("--poset", poset_path, "Poset JSON file");
    extremal->add_option("--mode", mode, "weak, induced or strong");
    extremal->add_option("--d", d, "Boolean algebra dimension")->check(CLI::PositiveNumber);
    extremal->add_option("--archive", archive, "Append the result to this JSONL archive");
    add_common(extremal);

    auto* verify = app.add_subcommand("verify-bounds", "Run a suite of exact searches against closed forms");
    verify->add_option("suite", suite_path, "Suite JSON file")->required();
    add_common(verify);

    auto* detect = app.add_subcommand("detect", "Find a copy of a structure in a family");
    detect->add_option("family", family_path, "Family file (JSON or binary)")->required();
    detect->add_option("--structure", structure, "poset, boolean-algebra or join")
        ->check(CLI::IsMember({"poset", "boolean-algebra", "join"}));
    detect->add_option("--poset", poset_path, "Poset JSON file");
    detect->add_option("--mode", mode, "weak, induced or strong");
    detect->add_option("--d", d, "Boolean algebra dimension")->check(CLI::PositiveNumber);
    add_common(detect);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(rep::Status::input);
    }

    try {
        const rep::CommonOptions opts = resolve(g);
        if (width->parsed()) return emit(rep::cmd_width(rep::parse_shape(shape_text)), g);
        if (partition->parsed()) {
            rep::Json doc;
            const auto r = rep::cmd_partition(rep::parse_shape(shape_text),
                                              partition_mode == "grids" ? rep::PartitionMode::grids
                                                                        : rep::PartitionMode::chains,
                                              d, opts, partition_path.empty() ? nullptr : &doc);
            if (!partition_path.empty() && !doc.is_null()) rep::write_file(partition_path, doc.dump(2) + "\n");
            return emit(r, g);
        }
        if (extremal->parsed()) {
            const auto spec = load_structure(structure, poset_path, mode, d);
            return emit(rep::cmd_extremal(rep::parse_shape(shape_text), spec, opts,
                                          archive.empty() ? std::nullopt : std::optional(archive)),
                        g);
        }
        if (verify->parsed()) {
            const std::string bytes = rep::read_file(suite_path);
            rep::Json suite;
            try {
                suite = rep::Json::parse(bytes);
            } catch (const rep::Json::exception& e) {
                throw pgl::InputError(suite_path + ": " + e.what());
            }
            return emit(rep::cmd_verify_bounds(suite, rep::fnv1a_hex(bytes), opts), g);
        }
        if (detect->parsed()) {
            const auto spec = load_structure(structure, poset_path, mode, d);
            const auto family = rep::load_family(family_path);
            return emit(rep::cmd_detect(family, rep::fnv1a_hex(rep::read_file(family_path)), spec, opts), g);
        }
    } catch (const pgl::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return static_cast<int>(rep::Status::budget);
    } catch (const pgl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(rep::Status::input);
    }
    return static_cast<int>(rep::Status::input);
}
