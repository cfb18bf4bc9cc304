// Command-line front end: grid fitting, explanation reports with plots,
// index tables, and dataset generation.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "muce/csv.hpp"
#include "muce/grid.hpp"
#include "muce/indices.hpp"
#include "muce/plot.hpp"
#include "muce/predictor.hpp"
#include "muce/process_predictor.hpp"
#include "muce/report.hpp"
#include "muce/synthetic.hpp"

namespace fs = std::filesystem;
using namespace muce;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitPredictor = 4;

struct CliFailure {
    std::string category; // machine-readable: bad-grid, bad-model, bad-observation, ...
    std::string message;
    int exit_code;
};

[[noreturn]] void die(std::string category, const std::string& message, int exit_code) {
    throw CliFailure{std::move(category), message, exit_code};
}

std::map<std::string, std::string> parse_kv_list(const std::string& spec) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string item = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string::npos) die("bad-model", "expected key=value in '" + item + "'", kExitPredictor);
        kv[item.substr(0, eq)] = item.substr(eq + 1);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return kv;
}

PredictorPtr build_model(const std::string& spec, const ExplanationGrid& grid) {
    try {
        std::size_t colon = spec.find(':');
        std::string head = spec.substr(0, colon);
        std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
        if (head == "constant") {
            return std::make_shared<ConstantPredictor>(rest.empty() ? 0.5 : parse_double(rest));
        }
        if (head == "cross") {
            CrossGeometry geom;
            double sharpness = 10.0;
            PositiveSide side = PositiveSide::inside;
            if (!rest.empty())
                for (const auto& [k, v] : parse_kv_list(rest)) {
                    if (k == "s") sharpness = parse_double(v);
                    else if (k == "L") geom.arm_half_length = parse_double(v);
                    else if (k == "W") geom.arm_half_width = parse_double(v);
                    else if (k == "positive") side = v == "outside" ? PositiveSide::outside : PositiveSide::inside;
                    else die("bad-model", "unknown cross parameter '" + k + "'", kExitPredictor);
                }
            return make_cross_predictor(geom, sharpness, side);
        }
        if (head == "ellipsoid") {
            EllipsoidGeometry geom;
            double sharpness = 10.0;
            PositiveSide side = PositiveSide::outside;
            if (!rest.empty())
                for (const auto& [k, v] : parse_kv_list(rest)) {
                    if (k == "s") sharpness = parse_double(v);
                    else if (k == "positive") side = v == "inside" ? PositiveSide::inside : PositiveSide::outside;
                    else die("bad-model", "unknown ellipsoid parameter '" + k + "'", kExitPredictor);
                }
            return make_ellipsoid_predictor(geom, sharpness, side);
        }
        if (head == "knn") {
            auto kv = parse_kv_list(rest);
            if (!kv.count("data") || !kv.count("schema"))
                die("bad-model", "knn model needs data=CSV,schema=JSON[,k=N]", kExitPredictor);
            std::size_t k = kv.count("k") ? static_cast<std::size_t>(parse_int(kv["k"])) : 5;
            Dataset train = load_dataset(kv["data"], kv["schema"]);
            return fit_knn_predictor(train, k);
        }
        if (head == "exec") {
            if (rest.empty()) die("bad-model", "exec model needs a command line", kExitPredictor);
            return std::make_shared<ProcessPredictor>(rest, grid.schema());
        }
        die("bad-model", "unknown model spec '" + spec + "'", kExitPredictor);
    } catch (const Error& e) {
        die("bad-model", e.what(), kExitPredictor);
    }
}

ExplanationGrid load_grid_file(const std::string& path) {
    try {
        std::ifstream in(path);
        if (!in) fail(Errc::io_failure, "cannot open '" + path + "'");
        nlohmann::json j;
        in >> j;
        return grid_from_json(j);
    } catch (const Error& e) {
        die("bad-grid", e.what(), kExitData);
    } catch (const nlohmann::json::exception& e) {
        die("bad-grid", path + ": " + e.what(), kExitData);
    }
}

FeatureValue parse_observation_value(const FeatureSpec& spec, const std::string& text) {
    switch (spec.kind) {
        case FeatureKind::continuous: return parse_double(text);
        case FeatureKind::categorical: return text;
        default: return parse_int(text);
    }
}

Observation resolve_observation(const ExplanationGrid& grid, const std::vector<std::string>& inline_kv,
                                const std::string& data_path, const std::string& schema_path,
                                int row_index) {
    try {
        Schema schema = grid.schema();
        if (!inline_kv.empty()) {
            Observation obs;
            for (const auto& item : inline_kv) {
                std::size_t eq = item.find('=');
                if (eq == std::string::npos)
                    fail(Errc::bad_config, "expected name=value, got '" + item + "'");
                std::string name = item.substr(0, eq);
                obs.set(name, parse_observation_value(require_feature(schema, name), item.substr(eq + 1)));
            }
            validate_observation(obs, schema);
            return obs;
        }
        if (data_path.empty() || row_index < 0)
            fail(Errc::bad_config, "give the observation inline (name=value ...) or via --data/--schema/--row");
        Dataset data = load_dataset(data_path, schema_path);
        if (static_cast<std::size_t>(row_index) >= data.rows.size())
            fail(Errc::bad_config, "--row " + std::to_string(row_index) + " out of range (" +
                                       std::to_string(data.rows.size()) + " rows)");
        Observation obs = data.rows[static_cast<std::size_t>(row_index)];
        validate_observation(obs, schema);
        return obs;
    } catch (const Error& e) {
        die("bad-observation", e.what(), kExitData);
    }
}

std::string safe_filename(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
    return out;
}

void write_report_outputs(const ExplanationReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_file(out_dir + "/report.json", report_to_json(report).dump(2) + "\n");
    for (const auto& fr : report.features) {
        std::string base = out_dir + "/" + safe_filename(fr.name);
        PlotFiles ice = render_ice_plot(fr);
        write_file(base + "_ice.svg", ice.svg);
        write_file(base + "_ice.csv", ice.csv);
        PlotFiles mc = render_muce_plot(fr);
        write_file(base + "_muce.svg", mc.svg);
        write_file(base + "_muce.csv", mc.csv);
    }
}

struct ExplainArgs {
    std::string grid_path;
    std::string model_spec;
    std::vector<std::string> obs_inline;
    std::string data_path, schema_path;
    int row = -1;
    std::string out_dir;
    int muce_n = 10;
    int t1 = 5;
    int ti = 1;
    std::size_t n_local = 11;
    std::uint64_t seed = 0;
    int restarts = 0;
    unsigned threads = 1;
};

ExplanationReport run_explain_pipeline(const ExplainArgs& args) {
    ExplanationGrid grid = load_grid_file(args.grid_path);
    PredictorPtr model = build_model(args.model_spec, grid);
    Observation obs =
        resolve_observation(grid, args.obs_inline, args.data_path, args.schema_path, args.row);

    MuceConfig config;
    config.n_iterations = args.muce_n;
    config.nsteps.assign(static_cast<std::size_t>(args.muce_n / 2) + 1, args.ti);
    config.nsteps[0] = args.t1;
    config.n_local = args.n_local;
    config.seed = args.seed;
    config.restarts = args.restarts;
    try {
        auto summary = summarize_observation(grid, obs, *model, config, args.threads);
        return build_report(grid, obs, *model, summary, config);
    } catch (const Error& e) {
        if (e.code() == Errc::predictor_failure) die("predictor-failure", e.what(), kExitPredictor);
        die("bad-observation", e.what(), kExitData);
    }
}

void add_explain_options(CLI::App* cmd, ExplainArgs& args, bool with_outdir) {
    cmd->add_option("--grid", args.grid_path, "grid artifact (JSON)")->required();
    cmd->add_option("--model", args.model_spec,
                    "model spec: constant:P | cross[:k=v,...] | ellipsoid[:k=v,...] | "
                    "knn:data=CSV,schema=JSON[,k=N] | exec:COMMAND")
        ->required();
    cmd->add_option("--obs", args.obs_inline, "observation as name=value pairs");
    cmd->add_option("--data", args.data_path, "dataset CSV providing the observation row");
    cmd->add_option("--schema", args.schema_path, "schema sidecar for --data");
    cmd->add_option("--row", args.row, "row index into --data");
    if (with_outdir) cmd->add_option("--out-dir", args.out_dir, "output directory")->required();
    cmd->add_option("--muce-n", args.muce_n, "MUCE iterations N (even)")->capture_default_str();
    cmd->add_option("--t1", args.t1, "repetitions for iteration 0")->capture_default_str();
    cmd->add_option("--ti", args.ti, "repetitions for later iterations")->capture_default_str();
    cmd->add_option("--n-local", args.n_local, "restricted-ICE sample count")->capture_default_str();
    cmd->add_option("--seed", args.seed, "seed for optional restarts")->capture_default_str();
    cmd->add_option("--restarts", args.restarts, "random-restart count for iteration 0")
        ->capture_default_str();
    cmd->add_option("--threads", args.threads, "per-feature parallelism (when the model allows)")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local explanations for black-box classifiers: restricted ICE curves, "
                 "MUCE max/min exploration, stability and uncertainty indices"};
    app.require_subcommand(1);

    // grid-fit
    auto* fit = app.add_subcommand("grid-fit", "fit and save an explanation grid");
    std::string fit_data, fit_schema, fit_out, fit_mode = "rows";
    GridOptions fit_options;
    fit->add_option("--data", fit_data, "training CSV")->required();
    fit->add_option("--schema", fit_schema, "schema sidecar (JSON)")->required();
    fit->add_option("--out", fit_out, "grid artifact path")->required();
    fit->add_option("--n-grid", fit_options.grid_size, "grid points per feature")->capture_default_str();
    fit->add_option("--stability-fraction", fit_options.stability_fraction,
                    "delta as a fraction of each feature's range")
        ->capture_default_str();
    fit->add_option("--k-categories", fit_options.k_categories, "k for category ordering")
        ->capture_default_str();
    fit->add_option("--category-model", fit_mode, "rows | centroids (privacy-preserving)")
        ->capture_default_str();

    // explain
    auto* explain = app.add_subcommand("explain", "full report with plots for one observation");
    ExplainArgs explain_args;
    add_explain_options(explain, explain_args, true);

    // indices
    auto* indices = app.add_subcommand("indices", "index table only, no plots");
    ExplainArgs indices_args;
    add_explain_options(indices, indices_args, false);
    std::string indices_out;
    indices->add_option("--out-dir", indices_out, "also write indices.csv and indices.json here");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "synthetic generators and the housing transform");
    dataset->require_subcommand(1);

    auto* gen_cross = dataset->add_subcommand("gen-cross", "2D cross-boundary dataset");
    int gc_total = 400, gc_positive = 132;
    std::uint64_t gc_seed = 7;
    CrossGeometry gc_geom;
    std::string gc_out;
    gen_cross->add_option("--out-dir", gc_out, "output directory")->required();
    gen_cross->add_option("--n-total", gc_total)->capture_default_str();
    gen_cross->add_option("--n-positive", gc_positive)->capture_default_str();
    gen_cross->add_option("--seed", gc_seed)->capture_default_str();
    gen_cross->add_option("--arm-half-length", gc_geom.arm_half_length)->capture_default_str();
    gen_cross->add_option("--arm-half-width", gc_geom.arm_half_width)->capture_default_str();

    auto* gen_ell = dataset->add_subcommand("gen-ellipsoid", "3D ellipsoid-boundary dataset");
    int ge_total = 400, ge_positive = 132;
    std::uint64_t ge_seed = 7;
    std::string ge_out;
    gen_ell->add_option("--out-dir", ge_out, "output directory")->required();
    gen_ell->add_option("--n-total", ge_total)->capture_default_str();
    gen_ell->add_option("--n-positive", ge_positive)->capture_default_str();
    gen_ell->add_option("--seed", ge_seed)->capture_default_str();

    auto* housing = dataset->add_subcommand("transform-housing", "heterogenize the housing table");
    std::string hs_in, hs_out;
    housing->add_option("--input", hs_in, "raw CSV (8 features + median house value)")->required();
    housing->add_option("--out-dir", hs_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fit->parsed()) {
            if (fit_mode != "rows" && fit_mode != "centroids")
                die("bad-grid", "--category-model must be rows or centroids", kExitData);
            fit_options.category_model =
                fit_mode == "rows" ? CategoryModelMode::rows : CategoryModelMode::centroids;
            Dataset data = load_dataset(fit_data, fit_schema);
            ExplanationGrid grid = fit_grid(data, fit_options);
            write_file(fit_out, grid_to_json(grid).dump(2) + "\n");
            std::cout << "grid: " << fit_out << " (" << grid.features.size() << " features, "
                      << data.rows.size() << " rows)\n";
        } else if (explain->parsed()) {
            ExplanationReport report = run_explain_pipeline(explain_args);
            write_report_outputs(report, explain_args.out_dir);
            std::cout << indices_table(report);
            std::cout << "report: " << explain_args.out_dir << "/report.json\n";
        } else if (indices->parsed()) {
            ExplanationReport report = run_explain_pipeline(indices_args);
            std::cout << indices_table(report);
            if (!indices_out.empty()) {
                fs::create_directories(indices_out);
                write_file(indices_out + "/indices.csv", indices_csv(report));
                write_file(indices_out + "/indices.json", indices_json(report).dump(2) + "\n");
            }
        } else if (gen_cross->parsed()) {
            Dataset data = generate_cross_2d(gc_total, gc_positive, gc_geom, gc_seed);
            fs::create_directories(gc_out);
            save_dataset(data, gc_out + "/cross.csv", gc_out + "/cross.schema.json");
            std::cout << "wrote " << data.rows.size() << " rows to " << gc_out << "/cross.csv\n";
        } else if (gen_ell->parsed()) {
            EllipsoidGeometry geom;
            Dataset data = generate_ellipsoid_3d(ge_total, ge_positive, geom, ge_seed);
            fs::create_directories(ge_out);
            save_dataset(data, ge_out + "/ellipsoid.csv", ge_out + "/ellipsoid.schema.json");
            std::cout << "wrote " << data.rows.size() << " rows to " << ge_out << "/ellipsoid.csv\n";
        } else if (housing->parsed()) {
            Dataset raw = load_housing_csv(hs_in);
            Dataset out = transform_housing(raw);
            fs::create_directories(hs_out);
            save_dataset(out, hs_out + "/housing.csv", hs_out + "/housing.schema.json");
            std::cout << "retained " << out.rows.size() << " of " << raw.rows.size() << " rows\n";
        }
    } catch (const CliFailure& f) {
        std::cerr << "error: " << f.category << ": " << f.message << "\n";
        return f.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
