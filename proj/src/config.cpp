#include "glr/config.hpp"

#include <limits>
#include <set>

#include "json.hpp"

#include "glr/error.hpp"
#include "glr/io.hpp"

namespace glr {

namespace {

using nlohmann::json;

/// Reads fields of one JSON object and rejects whatever is left over.
class Fields {
public:
    Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(label() + " must be a JSON object");
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void get(const std::string& key, int& out) {
        if (const json* v = find(key)) out = as_int(*v, key);
    }
    void get(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
                throw ConfigError(path(key) + " must be a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void get(const std::string& key, double& out) {
        if (const json* v = find(key)) out = as_double(*v, key);
    }
    void get(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key) + " must be true or false");
            out = v->get<bool>();
        }
    }
    void get(const std::string& key, std::optional<int>& out) {
        if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional<int>(as_int(*v, key));
    }
    void get(const std::string& key, std::optional<double>& out) {
        if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional<double>(as_double(*v, key));
    }
    void get(const std::string& key, std::optional<std::string>& out) {
        if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional<std::string>(as_string(*v, key));
    }
    template <typename E, typename Parse>
    void get_enum(const std::string& key, E& out, Parse parse) {
        if (const json* v = find(key)) out = parse(as_string(*v, key));
    }

    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + path(key) + "'");
    }

private:
    std::string label() const { return where_.empty() ? "configuration" : "'" + where_ + "'"; }

    int as_int(const json& v, const std::string& key) const {
        if (!v.is_number_integer()) throw ConfigError(path(key) + " must be an integer");
        const auto i = v.get<std::int64_t>();
        if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
            throw ConfigError(path(key) + " is out of range");
        return int(i);
    }
    double as_double(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
        return v.get<double>();
    }
    std::string as_string(const json& v, const std::string& key) const {
        if (!v.is_string()) throw ConfigError(path(key) + " must be a string");
        return v.get<std::string>();
    }

    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

void read_match(const json& j, MatchConfig& m) {
    Fields f(j, "solver.match");
    f.get("patch_size", m.patch_size);
    f.get("group_size", m.group_size);
    f.get("window_radius", m.window_radius);
    f.get("bm_stride", m.bm_stride);
    f.get("exemplar_stride", m.exemplar_stride);
    f.get("uniform_interval", m.uniform_interval);
    f.get("min_separation", m.min_separation);
    f.get("bm_threshold", m.bm_threshold);
    f.get_enum("mode", m.mode, parse_match_mode);
    f.get_enum("backend", m.backend, parse_backend);
    f.get("rerank", m.rerank);
    f.get("rerank_pool", m.rerank_pool);
    f.get("skip_edgeless", m.skip_edgeless);
    f.get("edge_threshold", m.edge_threshold);
    f.get("max_corners", m.max_corners);
    f.get("nms_radius", m.nms_radius);
    f.get("corner_quality", m.corner_quality);
    f.finish();
}

void read_wnnm(const json& j, WnnmParams& w) {
    Fields f(j, "solver.wnnm");
    f.get("c_weight", w.c_weight);
    f.get("eps", w.eps);
    f.get("fixed_weight", w.fixed_weight);
    f.finish();
}

void read_solver(const json& j, SolverConfig& s) {
    Fields f(j, "solver");
    f.get_enum("algorithm", s.algorithm, parse_algorithm);
    f.get_enum("regularizer", s.regularizer, parse_regularizer);
    f.get("max_iters", s.max_iters);
    f.get("match_refresh_interval", s.match_refresh_interval);
    f.get("peak", s.peak);
    f.get("sigma0", s.sigma0);
    f.get("sigma_min", s.sigma_min);
    f.get("admm_rho", s.admm_rho);
    f.get("tv_weight", s.tv_weight);
    f.get("tv_iters", s.tv_iters);
    f.get_enum("init", s.init, parse_init_mode);
    f.get("warm_start_iters", s.warm_start_iters);
    f.get("seed", s.seed);
    if (const json* m = f.find("match")) read_match(*m, s.match);
    if (const json* w = f.find("wnnm")) read_wnnm(*w, s.wnnm);
    f.finish();
}

void read_operator(const json& j, OperatorSpec& o) {
    Fields f(j, "operator");
    f.get_enum("kind", o.kind, parse_operator_kind);
    f.get("height", o.height);
    f.get("width", o.width);
    f.get("channels", o.channels);
    f.get("mask_seed", o.mask_seed);
    f.get("radial_lines", o.radial_lines);
    f.get_enum("pattern", o.pattern, parse_msfa_pattern);
    f.get("tile", o.tile);
    f.get("tile_file", o.tile_file);
    f.get("mask_file", o.mask_file);
    f.finish();
}

void read_paths(const json& j, RunPaths& p) {
    Fields f(j, "paths");
    f.get("measurement", p.measurement);
    f.get("reference", p.reference);
    f.get("output", p.output);
    f.get("report", p.report);
    f.get("trace", p.trace);
    f.finish();
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed configuration JSON: ") + e.what());
    }
    RunConfig cfg;
    Fields f(doc, "");
    if (const json* s = f.find("solver")) read_solver(*s, cfg.solver);
    if (const json* o = f.find("operator")) read_operator(*o, cfg.op);
    if (const json* p = f.find("paths")) read_paths(*p, cfg.paths);
    f.finish();
    cfg.solver.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text_file(path)); }

std::string serialize_run_config(const RunConfig& cfg, int indent) {
    const SolverConfig& s = cfg.solver;
    const MatchConfig& m = s.match;
    json match = {
        {"patch_size", m.patch_size},
        {"group_size", m.group_size},
        {"window_radius", m.window_radius},
        {"bm_stride", m.bm_stride},
        {"exemplar_stride", m.exemplar_stride},
        {"uniform_interval", opt(m.uniform_interval)},
        {"min_separation", m.min_separation},
        {"bm_threshold", opt(m.bm_threshold)},
        {"mode", to_string(m.mode)},
        {"backend", to_string(m.backend)},
        {"rerank", m.rerank},
        {"rerank_pool", m.rerank_pool},
        {"skip_edgeless", m.skip_edgeless},
        {"edge_threshold", m.edge_threshold},
        {"max_corners", m.max_corners},
        {"nms_radius", opt(m.nms_radius)},
        {"corner_quality", m.corner_quality},
    };
    json wnnm = {{"c_weight", s.wnnm.c_weight}, {"eps", s.wnnm.eps}, {"fixed_weight", opt(s.wnnm.fixed_weight)}};
    json solver = {
        {"algorithm", to_string(s.algorithm)},
        {"regularizer", to_string(s.regularizer)},
        {"max_iters", s.max_iters},
        {"match_refresh_interval", s.match_refresh_interval},
        {"peak", s.peak},
        {"sigma0", s.sigma0},
        {"sigma_min", s.sigma_min},
        {"admm_rho", s.admm_rho},
        {"tv_weight", s.tv_weight},
        {"tv_iters", s.tv_iters},
        {"init", to_string(s.init)},
        {"warm_start_iters", s.warm_start_iters},
        {"seed", s.seed},
        {"match", match},
        {"wnnm", wnnm},
    };
    const OperatorSpec& o = cfg.op;
    json op = {
        {"kind", to_string(o.kind)},
        {"height", o.height},
        {"width", o.width},
        {"channels", o.channels},
        {"mask_seed", o.mask_seed},
        {"radial_lines", o.radial_lines},
        {"pattern", to_string(o.pattern)},
        {"tile", opt(o.tile)},
        {"tile_file", opt(o.tile_file)},
        {"mask_file", opt(o.mask_file)},
    };
    const RunPaths& p = cfg.paths;
    json paths = {
        {"measurement", opt(p.measurement)}, {"reference", opt(p.reference)}, {"output", opt(p.output)},
        {"report", opt(p.report)},           {"trace", opt(p.trace)},
    };
    json doc = {{"solver", solver}, {"operator", op}, {"paths", paths}};
    return doc.dump(indent) + "\n";
}

std::unique_ptr<SensingOperator> make_operator(const OperatorSpec& spec) {
    if (spec.height < 1 || spec.width < 1) throw ConfigError("operator size must be positive");
    std::optional<MaskSet> loaded;
    if (spec.mask_file) loaded = MaskSet{read_tensor(*spec.mask_file)};
    switch (spec.kind) {
    case OperatorKind::Cacti:
        if (loaded) return std::make_unique<CactiOperator>(std::move(*loaded));
        if (spec.channels < 1) throw ConfigError("CACTI needs at least one frame");
        return std::make_unique<CactiOperator>(bernoulli_masks(spec.height, spec.width, spec.channels, spec.mask_seed));
    case OperatorKind::Fourier:
        if (loaded) {
            if (loaded->masks.channels() != 1) throw ConfigError("a Fourier mask file must have one channel");
            return std::make_unique<FourierOperator>(FourierMask{std::move(loaded->masks)});
        }
        return std::make_unique<FourierOperator>(radial_mask(spec.height, spec.width, spec.radial_lines));
    case OperatorKind::Msfa: {
        if (loaded) return std::make_unique<MsfaOperator>(std::move(*loaded));
        std::optional<FilterTile> tile;
        if (spec.tile) tile = parse_tile(*spec.tile);
        else if (spec.tile_file) tile = parse_tile(read_text_file(*spec.tile_file));
        return std::make_unique<MsfaOperator>(msfa_pattern(spec.pattern, spec.channels, spec.height, spec.width, tile));
    }
    }
    throw ConfigError("unknown operator kind");
}

} // namespace glr
