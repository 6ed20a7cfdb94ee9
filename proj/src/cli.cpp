#include "glr/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "glr/bench.hpp"
#include "glr/config.hpp"
#include "glr/error.hpp"
#include "glr/io.hpp"
#include "glr/metrics.hpp"
#include "glr/scenes.hpp"

namespace glr {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct DemoArgs {
    std::string scene = "moving-square";
    int height = 64, width = 64, channels = 4;
    std::uint64_t seed = 7;
    std::string out, dtype = "f64", preview;
};

struct SimulateArgs {
    std::string model, scene_file, demo, mask_file, tile_file, pattern = "periodic-4x4";
    std::string out, truth_out, config_out;
    int height = 64, width = 64, channels = 4, lines = 30;
    std::uint64_t seed = 7, mask_seed = 11;
    double noise = 0.0;
};

struct ReconstructArgs {
    std::string config, measurement, reference, out, report, trace, preview, algorithm, regularizer;
    int iters = -1, warm = -1;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

struct MaskArgs {
    std::string type, pattern = "periodic-4x4", tile_file, out, preview;
    int height = 64, width = 64, lines = 30, channels = 4;
    std::uint64_t seed = 11;
};

struct MetricsArgs {
    std::string ref, test;
    double peak = 1.0;
    bool json = false;
    std::uint64_t seed = 0;
};

struct BenchArgs {
    std::vector<int> sizes{128}, channels{1, 3, 6};
    std::vector<std::string> modes{"gm", "gm-rerank", "bm"};
    int repeats = 5, patch = 8, group = 64;
    std::uint64_t seed = 3;
    std::string out, plot_data;
};

int run_demo(const DemoArgs& a, std::ostream& out) {
    const Tensor3d x = demo_scene(a.scene, a.height, a.width, a.channels, a.seed);
    write_tensor(a.out, x, parse_dtype(a.dtype));
    if (!a.preview.empty()) write_png_preview(a.preview, x, 1.0, x.channels() == 1 || x.channels() == 3 ? std::nullopt : std::optional<int>(0));
    out << "wrote " << a.scene << " scene " << a.height << "x" << a.width << "x" << x.channels() << " to " << a.out << "\n";
    return kExitOk;
}

OperatorSpec simulate_spec(const SimulateArgs& a, int H, int W, int C) {
    OperatorSpec spec;
    spec.kind = parse_operator_kind(a.model);
    spec.height = H;
    spec.width = W;
    spec.channels = C;
    spec.mask_seed = a.mask_seed;
    spec.radial_lines = a.lines;
    spec.pattern = parse_msfa_pattern(a.pattern);
    if (!a.tile_file.empty()) {
        spec.tile = read_text_file(a.tile_file);
        spec.pattern = MsfaPattern::CustomTile;
    }
    if (!a.mask_file.empty()) spec.mask_file = a.mask_file;
    return spec;
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.scene_file.empty() == a.demo.empty()) throw ConfigError("simulate needs exactly one of --scene or --demo");
    const Tensor3d x = a.demo.empty() ? read_tensor(a.scene_file)
                                      : demo_scene(a.demo, a.height, a.width, a.channels, a.seed);
    const OperatorSpec spec = simulate_spec(a, x.height(), x.width(), x.channels());
    const auto op = make_operator(spec);
    if (op->height() != x.height() || op->width() != x.width() || op->channels() != x.channels())
        throw ConfigError("operator and scene shapes differ");
    Measurement y = op->forward(x);
    if (a.noise > 0.0) {
        if (auto* real = std::get_if<Tensor3d>(&y)) {
            *real = add_noise(*real, a.noise, a.seed ^ 0x9e3779b97f4a7c15ull);
        } else {
            auto& spec_y = std::get<ComplexTensor2>(y);
            Tensor3d re(spec_y.height(), spec_y.width(), 1), im(spec_y.height(), spec_y.width(), 1);
            re.data() = spec_y.data().real();
            im.data() = spec_y.data().imag();
            re = add_noise(re, a.noise, a.seed ^ 0x9e3779b97f4a7c15ull);
            im = add_noise(im, a.noise, a.seed ^ 0x7f4a7c159e3779b9ull);
            const Tensor3d& map = dynamic_cast<const FourierOperator&>(*op).mask().map;
            for (Index i = 0; i < spec_y.data().size(); ++i)
                spec_y.data()[i] = map.data()[i] != 0.0 ? std::complex<double>(re.data()[i], im.data()[i]) : 0.0;
        }
    }
    write_measurement(a.out, y);
    if (!a.truth_out.empty()) write_tensor(a.truth_out, x);
    if (!a.config_out.empty()) {
        RunConfig cfg;
        cfg.op = spec;
        cfg.paths.measurement = a.out;
        if (!a.truth_out.empty()) cfg.paths.reference = a.truth_out;
        write_text_file(a.config_out, serialize_run_config(cfg));
    }
    out << "wrote " << to_string(spec.kind) << " measurement to " << a.out << "\n";
    return kExitOk;
}

int run_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
    if (!a.measurement.empty()) cfg.paths.measurement = a.measurement;
    if (!a.reference.empty()) cfg.paths.reference = a.reference;
    if (!a.out.empty()) cfg.paths.output = a.out;
    if (!a.report.empty()) cfg.paths.report = a.report;
    if (!a.trace.empty()) cfg.paths.trace = a.trace;
    if (!a.algorithm.empty()) cfg.solver.algorithm = parse_algorithm(a.algorithm);
    if (!a.regularizer.empty()) cfg.solver.regularizer = parse_regularizer(a.regularizer);
    if (a.iters >= 0) cfg.solver.max_iters = a.iters;
    if (a.warm >= 0) cfg.solver.warm_start_iters = a.warm;
    if (a.seed) cfg.solver.seed = *a.seed;
    cfg.solver.validate();
    if (!cfg.paths.measurement) throw ConfigError("reconstruct needs a measurement (--measurement or paths.measurement)");
    if (!cfg.paths.output) throw ConfigError("reconstruct needs an output path (--out or paths.output)");

    const auto op = make_operator(cfg.op);
    const Measurement y = read_measurement(*cfg.paths.measurement);
    std::optional<Tensor3d> ref;
    if (cfg.paths.reference) ref = read_tensor(*cfg.paths.reference);
    const int n = cfg.solver.max_iters;
    IterateObserver progress;
    if (!a.quiet)
        progress = [&](int k, const Tensor3d&) {
            if (k == n || k % 10 == 0) err << "iteration " << k << "/" << n << "\n" << std::flush;
        };
    const ReconResult res = solve(*op, y, cfg.solver, ref ? &*ref : nullptr, progress);
    write_tensor(*cfg.paths.output, res.x);
    if (cfg.paths.report) write_report_csv(*cfg.paths.report, res.report);
    if (cfg.paths.trace) write_trace_jsonl(*cfg.paths.trace, res.report);
    if (!a.preview.empty()) {
        const int C = res.x.channels();
        write_png_preview(a.preview, res.x, cfg.solver.peak, C == 1 || C == 3 ? std::nullopt : std::optional<int>(0));
    }
    out << to_string(cfg.solver.algorithm) << "+" << to_string(cfg.solver.regularizer) << " " << n << " iterations, "
        << fmt("%.1f", res.report.total_ms) << " ms\n";
    if (ref) {
        const MetricResult m = evaluate(*ref, res.x, cfg.solver.peak);
        out << "psnr_db " << fmt("%.4f", m.psnr_db) << "\nssim " << fmt("%.6f", m.ssim) << "\n";
    }
    return kExitOk;
}

int run_mask(const MaskArgs& a, std::ostream& out) {
    Tensor3d masks;
    if (a.type == "radial") {
        masks = radial_mask(a.height, a.width, a.lines).map;
    } else if (a.type == "cacti-bernoulli") {
        masks = bernoulli_masks(a.height, a.width, a.channels, a.seed).masks;
    } else if (a.type == "msfa") {
        std::optional<FilterTile> tile;
        MsfaPattern pattern = parse_msfa_pattern(a.pattern);
        if (!a.tile_file.empty()) {
            tile = parse_tile(read_text_file(a.tile_file));
            pattern = MsfaPattern::CustomTile;
        }
        MaskSet m = msfa_pattern(pattern, a.channels, a.height, a.width, tile);
        check_partition(m);
        masks = std::move(m.masks);
    } else {
        throw ConfigError("unknown mask type '" + a.type + "' (expected radial, msfa or cacti-bernoulli)");
    }
    write_tensor(a.out, masks);
    if (!a.preview.empty()) {
        const Tensor3d shown = a.type == "radial" ? fftshift(masks) : masks;
        write_png_preview(a.preview, shown, 1.0, shown.channels() == 1 ? std::nullopt : std::optional<int>(0));
    }
    out << "wrote " << a.type << " masks " << masks.height() << "x" << masks.width() << "x" << masks.channels()
        << " to " << a.out << "\n";
    return kExitOk;
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
    const Tensor3d ref = read_tensor(a.ref), test = read_tensor(a.test);
    if (!ref.same_shape(test)) throw ShapeError("reference and test tensors differ in shape");
    const MetricResult m = evaluate(ref, test, a.peak);
    if (a.json) {
        nlohmann::ordered_json j = {{"psnr_db", m.psnr_db},
                                    {"ssim", m.ssim},
                                    {"psnr_per_channel", m.psnr_per_channel},
                                    {"ssim_per_channel", m.ssim_per_channel}};
        out << j.dump() << "\n";
    } else {
        out << "psnr_db " << fmt("%.4f", m.psnr_db) << "\nssim " << fmt("%.6f", m.ssim) << "\n";
    }
    return kExitOk;
}

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    BenchOptions o;
    o.sizes = a.sizes;
    o.channels = a.channels;
    o.modes.clear();
    for (const std::string& m : a.modes) o.modes.push_back(parse_bench_mode(m));
    o.repeats = a.repeats;
    o.seed = a.seed;
    o.match.patch_size = a.patch;
    o.match.group_size = a.group;
    err << "benchmarking " << o.sizes.size() * o.channels.size() * o.modes.size() << " configurations\n";
    const auto rows = bench_matching(o);
    const std::string csv = bench_csv(rows);
    if (a.out.empty()) out << csv;
    else write_text_file(a.out, csv);
    if (!a.plot_data.empty()) write_plot_data(a.plot_data, rows);
    return kExitOk;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Global low-rank reconstruction for snapshot imaging", "glr"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    DemoArgs demo;
    auto* c_demo = app.add_subcommand("demo", "Write a seeded synthetic scene");
    c_demo->add_option("--scene", demo.scene, "moving-square, phantom, multispectral or textured-quadrant")->capture_default_str();
    c_demo->add_option("--height", demo.height)->capture_default_str();
    c_demo->add_option("--width", demo.width)->capture_default_str();
    c_demo->add_option("--channels", demo.channels, "Frames or bands")->capture_default_str();
    c_demo->add_option("--seed", demo.seed)->capture_default_str();
    c_demo->add_option("--dtype", demo.dtype, "f64, f32 or u8")->capture_default_str();
    c_demo->add_option("--out", demo.out, "Tensor file to write")->required();
    c_demo->add_option("--preview", demo.preview, "Optional PNG preview");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Apply a forward model to a scene");
    c_sim->add_option("--model", sim.model, "cacti, fourier or msfa")->required();
    c_sim->add_option("--scene", sim.scene_file, "Scene tensor file");
    c_sim->add_option("--demo", sim.demo, "Generate a demo scene instead of reading one");
    c_sim->add_option("--height", sim.height, "Demo scene height")->capture_default_str();
    c_sim->add_option("--width", sim.width, "Demo scene width")->capture_default_str();
    c_sim->add_option("--channels", sim.channels, "Demo scene channels")->capture_default_str();
    c_sim->add_option("--mask", sim.mask_file, "Mask tensor file instead of generated masks");
    c_sim->add_option("--mask-seed", sim.mask_seed, "Bernoulli mask seed")->capture_default_str();
    c_sim->add_option("--lines", sim.lines, "Radial lines")->capture_default_str();
    c_sim->add_option("--pattern", sim.pattern, "MSFA pattern")->capture_default_str();
    c_sim->add_option("--tile", sim.tile_file, "MSFA tile text file");
    c_sim->add_option("--noise", sim.noise, "Gaussian noise std on the measurement")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "Scene and noise seed")->capture_default_str();
    c_sim->add_option("--out", sim.out, "Measurement file")->required();
    c_sim->add_option("--truth-out", sim.truth_out, "Also write the scene");
    c_sim->add_option("--config-out", sim.config_out, "Write a run configuration for reconstruct");

    ReconstructArgs rec;
    auto* c_rec = app.add_subcommand("reconstruct", "Recover a scene from a measurement");
    c_rec->add_option("--config", rec.config, "Run configuration JSON");
    c_rec->add_option("--measurement", rec.measurement);
    c_rec->add_option("--reference", rec.reference, "Ground truth for per-iteration metrics");
    c_rec->add_option("--out", rec.out, "Reconstruction tensor file");
    c_rec->add_option("--report", rec.report, "Per-iteration CSV");
    c_rec->add_option("--trace", rec.trace, "Per-iteration JSON lines");
    c_rec->add_option("--preview", rec.preview, "PNG preview of the result");
    c_rec->add_option("--algorithm", rec.algorithm, "gap or admm");
    c_rec->add_option("--regularizer", rec.regularizer, "glr, nlr-bm, nlr-corner-bm, nlr-corner-uniform-bm or tv");
    c_rec->add_option("--iters", rec.iters, "Iteration count");
    c_rec->add_option("--warm-start", rec.warm, "Leading TV iterations");
    c_rec->add_option("--seed", rec.seed, "Overrides solver.seed");
    c_rec->add_flag("--quiet", rec.quiet, "No progress on standard error");

    MaskArgs mask;
    auto* c_mask = app.add_subcommand("mask", "Sensing masks");
    c_mask->require_subcommand(1);
    auto* c_gen = c_mask->add_subcommand("gen", "Generate masks");
    c_gen->add_option("--type", mask.type, "radial, msfa or cacti-bernoulli")->required();
    c_gen->add_option("--height", mask.height)->capture_default_str();
    c_gen->add_option("--width", mask.width)->capture_default_str();
    c_gen->add_option("--lines", mask.lines, "Radial lines")->capture_default_str();
    c_gen->add_option("--channels,--frames", mask.channels, "Frames or bands")->capture_default_str();
    c_gen->add_option("--pattern", mask.pattern, "MSFA pattern")->capture_default_str();
    c_gen->add_option("--tile", mask.tile_file, "MSFA tile text file");
    c_gen->add_option("--seed", mask.seed)->capture_default_str();
    c_gen->add_option("--out", mask.out)->required();
    c_gen->add_option("--preview", mask.preview, "PNG preview (first channel)");

    MetricsArgs met;
    auto* c_met = app.add_subcommand("metrics", "PSNR and SSIM of a test tensor against a reference");
    c_met->add_option("--ref", met.ref)->required();
    c_met->add_option("--test", met.test)->required();
    c_met->add_option("--peak", met.peak)->capture_default_str();
    c_met->add_flag("--json", met.json, "Print one JSON object");
    c_met->add_option("--seed", met.seed, "Accepted for uniformity; metrics are deterministic");

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "Time global matching against block matching");
    c_bench->add_option("--sizes", bench.sizes)->delimiter(',')->capture_default_str();
    c_bench->add_option("--channels", bench.channels)->delimiter(',')->capture_default_str();
    c_bench->add_option("--modes", bench.modes, "gm, gm-rerank, bm")->delimiter(',')->capture_default_str();
    c_bench->add_option("--repeats", bench.repeats)->capture_default_str();
    c_bench->add_option("--patch", bench.patch)->capture_default_str();
    c_bench->add_option("--group-size", bench.group)->capture_default_str();
    c_bench->add_option("--seed", bench.seed)->capture_default_str();
    c_bench->add_option("--out", bench.out, "CSV file (default: standard output)");
    c_bench->add_option("--plot-data", bench.plot_data, "Directory for plot-ready CSV tables");

    std::vector<const char*> argv{"glr"};
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        // requirement checks run before extras are reported; name the stray
        // arguments first since they are usually the real mistake
        const auto extras = app.remaining(true);
        if (!extras.empty()) {
            err << "error: unknown " << (app.get_subcommands().empty() ? "subcommand" : "argument") << " '"
                << extras.front() << "'\n\n";
        } else {
            err << "error: " << e.what() << "\n\n";
        }
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        if (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
        err << sub->help();
        return kExitConfig;
    }

    try {
        if (c_demo->parsed()) return run_demo(demo, out);
        if (c_sim->parsed()) return run_simulate(sim, out);
        if (c_rec->parsed()) return run_reconstruct(rec, out, err);
        if (c_gen->parsed()) return run_mask(mask, out);
        if (c_met->parsed()) return run_metrics(met, out);
        if (c_bench->parsed()) return run_bench(bench, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << app.help();
    return kExitConfig;
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

} // namespace glr
