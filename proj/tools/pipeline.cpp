#include "cli.hpp"

#include "equnfold/errors.hpp"

#include <cmath>

namespace equnfold::cli {

namespace {

json load_inline_or_file(const json& j, const char* key, const char* file_key, const std::filesystem::path& base) {
    const bool inline_given = j.contains(key);
    const bool file_given = j.contains(file_key);
    if (inline_given && file_given) {
        throw io::SchemaError(std::string("give either '") + key + "' or '" + file_key + "', not both");
    }
    if (file_given) {
        const json& f = j[file_key];
        if (!f.is_string()) {
            throw io::SchemaError(std::string("'") + file_key + "' must be a path string");
        }
        std::filesystem::path p = f.get<std::string>();
        if (p.is_relative()) {
            p = base / p;
        }
        return io::read_file(p);
    }
    return j[key];
}

double positive(const json& t, const char* key, double fallback) {
    if (!t.contains(key)) {
        return fallback;
    }
    const json& v = t[key];
    if (!v.is_number() || !(v.get<double>() > 0.0)) {
        throw io::SchemaError(std::string("tolerance '") + key + "' must be a positive number");
    }
    return v.get<double>();
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw io::SchemaError("config must be a JSON object");
    }
    RunConfig cfg;
    int sources = 0;
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) {
            throw io::SchemaError("'preset' must be a string");
        }
        try {
            cfg.preset = d3::parse_case(j["preset"].get<std::string>());
        } catch (const Error& e) {
            throw io::SchemaError(e.what());
        }
        ++sources;
    }
    if (j.contains("lambda_seeds") && j["lambda_seeds"].is_string()) {
        d3::Case c;
        try {
            c = d3::parse_case(j["lambda_seeds"].get<std::string>());
        } catch (const Error& e) {
            throw io::SchemaError(e.what());
        }
        if (cfg.preset && *cfg.preset != c) {
            throw io::SchemaError("'preset' and 'lambda_seeds' name different cases");
        }
        if (!cfg.preset) {
            ++sources;
        }
        cfg.preset = c;
    }
    if (j.contains("model") || j.contains("model_file")) {
        cfg.model = load_inline_or_file(j, "model", "model_file", base_dir);
        ++sources;
    }
    if (sources != 1) {
        throw io::SchemaError("config needs exactly one model source (model, model_file or a d3 preset)");
    }
    if (j.contains("group") || j.contains("group_file")) {
        cfg.group = load_inline_or_file(j, "group", "group_file", base_dir);
    }
    if (j.contains("point_index")) {
        if (!j["point_index"].is_number_integer() || j["point_index"].get<int>() < 0) {
            throw io::SchemaError("'point_index' must be a nonnegative integer");
        }
        cfg.point_index = j["point_index"].get<int>();
    }
    if (j.contains("lambda_seeds") && j["lambda_seeds"].is_array()) {
        for (const auto& s : j["lambda_seeds"]) {
            cfg.lambda_seeds.push_back(io::complex_from_json(s));
        }
    }
    if (cfg.model && cfg.lambda_seeds.empty()) {
        throw io::SchemaError("a model config needs 'lambda_seeds'");
    }
    if (j.contains("direction_seeds")) {
        const json& ds = j["direction_seeds"];
        if (!ds.is_array()) {
            throw io::SchemaError("'direction_seeds' must be an array (one list per eigenvalue)");
        }
        for (const auto& per : ds) {
            if (!per.is_array()) {
                throw io::SchemaError("each 'direction_seeds' entry must be a list of vectors");
            }
            std::vector<CVector> block;
            for (const auto& v : per) {
                block.push_back(io::vector_from_json(v));
            }
            cfg.direction_seeds.push_back(std::move(block));
        }
    }
    if (j.contains("delays")) {
        const json& d = j["delays"];
        if (!d.is_array() || d.empty()) {
            throw io::SchemaError("'delays' must be a nonempty array of numbers");
        }
        std::vector<double> lags;
        for (const auto& x : d) {
            if (!x.is_number() || x.get<double>() < 0.0) {
                throw io::SchemaError("delays must be nonnegative numbers");
            }
            lags.push_back(x.get<double>());
        }
        cfg.delays = std::move(lags);
    }
    if (j.contains("sparsity")) {
        const json& s = j["sparsity"];
        if (!s.is_array()) {
            throw io::SchemaError("'sparsity' must be an array of masks");
        }
        for (const auto& m : s) {
            cfg.sparsity.push_back(io::mask_from_json(m));
        }
        if (!cfg.delays || cfg.sparsity.size() != cfg.delays->size()) {
            throw io::SchemaError("'sparsity' needs explicit 'delays' and one mask per delay");
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) {
            throw io::SchemaError("'tolerances' must be an object");
        }
        cfg.tolerances.root = positive(t, "root", cfg.tolerances.root);
        cfg.tolerances.rank = positive(t, "rank", cfg.tolerances.rank);
    }
    if (j.contains("select_miniversal")) {
        if (!j["select_miniversal"].is_boolean()) {
            throw io::SchemaError("'select_miniversal' must be a boolean");
        }
        cfg.select_miniversal = j["select_miniversal"].get<bool>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) {
            throw io::SchemaError("'output' must be a path string");
        }
        std::filesystem::path p = j["output"].get<std::string>();
        cfg.output = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    return cfg;
}

namespace {

struct Pipeline {
    Representation rho;
    SpectralFrame frame;
    OrbitGeometry geometry;
    std::vector<double> lags;
    std::vector<EntryMask> masks;
    AssemblyResult assembly;
    std::optional<RealFamily> real;
};

json point_to_json(const d3::DoubleHopfPoint& p) {
    return {{"factor", d3::to_string(p.factor)},
            {"alpha", p.alpha},
            {"beta", p.beta},
            {"tau_s", p.tau_s},
            {"tau_n", p.tau_n},
            {"omega1", p.omega1},
            {"omega2", p.omega2},
            {"residual", p.residual},
            {"iterations", p.iterations},
            {"seed",
             {{"sign", p.seed.sign}, {"branch1", p.seed.branch1}, {"branch2", p.seed.branch2},
              {"omega1", p.seed.omega1}, {"omega2", p.seed.omega2}}}};
}

json build_artifact(const Pipeline& p, const json& source) {
    const auto& a = p.assembly;
    json params = io::family_to_json(a.family);
    for (std::size_t m = 0; m < a.family.parameters.size(); ++m) {
        const auto idx = static_cast<std::size_t>(a.family.parameters[m].source_index);
        params["parameters"][m]["target"] = io::matrix_to_json(a.R_projected[idx]);
    }
    json directions = json::array();
    for (const auto& d : a.directions) {
        directions.push_back(io::matrix_to_json(d));
    }
    json masks = json::array();
    for (const auto& m : p.masks) {
        masks.push_back(io::mask_to_json(m));
    }
    json art = {{"schema", io::kSchema},
                {"status", "ok"},
                {"source", source},
                {"model", io::operator_to_json(p.frame.op)},
                {"group", io::representation_to_json(p.rho)},
                {"frame", io::frame_to_json(p.frame)},
                {"lags", p.lags},
                {"masks", masks},
                {"family", params},
                {"directions", directions},
                {"theta", io::theta_to_json(a.theta)},
                {"versality", io::versality_to_json(a.versality)},
                {"gamma_geometry",
                 {{"commutant_dim", a.gamma.commutant.size()},
                  {"tangent_dim", a.gamma.tangent_basis.size()},
                  {"centralizer_dim", a.gamma.centralizer_dim}}},
                {"orbit",
                 {{"codimension", p.geometry.codimension}, {"tangent_dim", p.geometry.tangent_basis.size()}}},
                {"residuals",
                 {{"projection_identity", a.projection_identity_residual},
                  {"reconstruction", a.reconstruction_residual},
                  {"equivariance", a.equivariance_residual}}}};
    if (p.real) {
        json rf = io::family_to_json(p.real->family);
        json pairs = json::array();
        for (const auto& [m, k] : p.real->pairs) {
            pairs.push_back({m, k});
        }
        rf["pairs"] = pairs;
        rf["reparametrization"] = io::matrix_to_json(p.real->reparametrization);
        rf["inverse_condition"] = p.real->inverse_condition;
        art["real_family"] = rf;
    }
    return art;
}

int exit_for(const VersalityReport& v) { return v.miniversal ? kExitOk : kExitVersalOnly; }

json error_artifact(const json& source, const std::string& kind, const std::string& message) {
    return {{"schema", io::kSchema},
            {"status", "error"},
            {"source", source},
            {"error", {{"kind", kind}, {"message", message}}}};
}

UnfoldOutcome run_preset(const RunConfig& cfg) {
    const d3::Case c = *cfg.preset;
    json source = {{"preset", std::string("d3:") + std::string(d3::to_string(c))}, {"point_index", cfg.point_index}};
    const auto [beta, tau_n] = d3::case_window(c);
    const auto points = d3::locate_double_hopf(d3::factor_of(c), beta, tau_n);
    if (static_cast<std::size_t>(cfg.point_index) >= points.size()) {
        throw Error(ErrorKind::Convergence, "double-Hopf point index " + std::to_string(cfg.point_index) +
                                                " out of range (" + std::to_string(points.size()) + " located)");
    }
    const auto& pt = points[static_cast<std::size_t>(cfg.point_index)];
    source["point"] = point_to_json(pt);
    d3::CaseOptions opt;
    opt.select_miniversal = cfg.select_miniversal;
    if (cfg.delays) {
        opt.lags = cfg.delays;
    }
    auto res = d3::run_case(c, pt, opt);
    Pipeline p{res.rho, res.frame, res.geometry, res.lags, d3::structure_masks(), res.assembly, res.real};
    json art = build_artifact(p, source);
    art["d3"] = {{"case", d3::to_string(c)},
                 {"M", io::matrix_to_json(res.M)},
                 {"det_M", res.det_M},
                 {"epsilon", io::matrix_to_json(res.epsilon)},
                 {"patterns_ok", res.patterns.ok},
                 {"pattern_residual", res.patterns.residual}};
    if (res.real) {
        art["d3"]["epsilon_real"] = io::matrix_to_json(res.epsilon_real);
        art["d3"]["real_patterns_ok"] = res.real_patterns.ok;
    }
    return {art, exit_for(res.assembly.versality)};
}

UnfoldOutcome run_model(const RunConfig& cfg) {
    DelayOperator op = [&] {
        try {
            return io::operator_from_json(*cfg.model);
        } catch (const Error& e) {
            throw io::SchemaError(std::string("model: ") + e.what());
        }
    }();
    Representation rho = [&] {
        if (!cfg.group) {
            return trivial_representation(std::make_shared<const FiniteGroup>(std::vector<std::vector<int>>{{0}}),
                                          op.dim());
        }
        try {
            return io::representation_from_json(*cfg.group);
        } catch (const Error& e) {
            throw io::SchemaError(std::string("group: ") + e.what());
        }
    }();
    if (const double eq = check_equivariance(op, rho); eq > 1e-10) {
        throw Error(ErrorKind::Structural, "equivariance residual " + std::to_string(eq) + " exceeds 1e-10");
    }
    json source = {{"model_config", true}};
    RootOptions ropt;
    ropt.residual_tol = cfg.tolerances.root;
    std::vector<cplx> eig;
    for (cplx s : cfg.lambda_seeds) {
        const cplx r = find_root(op, s, ropt).root;
        if (std::none_of(eig.begin(), eig.end(), [&](cplx e) { return std::abs(e - r) < 1e-8 * (1.0 + std::abs(r)); })) {
            eig.push_back(r);
        }
    }
    EigenbasisOptions eopt;
    eopt.rank_tol = cfg.tolerances.rank;
    eopt.seeds = cfg.direction_seeds;
    SpectralFrame frame = eigenbasis(op, eig, eopt);
    frame.G = induce_representation(frame, rho);
    OrbitGeometry geometry = orbit_geometry(frame.B, jordan_spec_of_diagonal(frame.B));
    std::vector<double> lags = cfg.delays ? *cfg.delays : default_delay_set(frame);
    AssemblyOptions aopt;
    aopt.masks = cfg.sparsity;
    aopt.select_miniversal = cfg.select_miniversal;
    AssemblyResult assembly = assemble_gamma_unfolding(rho, frame, geometry, lags, aopt);
    std::optional<RealFamily> real;
    if (cfg.select_miniversal && op.is_real(1e-14)) {
        real = realify(assembly.family);
    }
    Pipeline p{std::move(rho), std::move(frame), std::move(geometry), std::move(lags), cfg.sparsity,
               std::move(assembly), std::move(real)};
    return {build_artifact(p, source), exit_for(p.assembly.versality)};
}

}  // namespace

UnfoldOutcome unfold(const RunConfig& config) {
    json source = config.preset ? json{{"preset", std::string("d3:") + std::string(d3::to_string(*config.preset))}}
                                : json{{"model_config", true}};
    try {
        return config.preset ? run_preset(config) : run_model(config);
    } catch (const io::SchemaError&) {
        throw;
    } catch (const Error& e) {
        return {error_artifact(source, std::string(to_string(e.kind())), e.what()), kExitPipeline};
    } catch (const std::exception& e) {
        return {error_artifact(source, "internal", e.what()), kExitPipeline};
    }
}

}  // namespace equnfold::cli
