#include "cli.hpp"

#include "equnfold/errors.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <sstream>

namespace equnfold::cli {

namespace {

double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw io::SchemaError("malformed " + what + ": '" + s + "'");
    }
    if (pos != s.size()) {
        throw io::SchemaError("malformed " + what + ": '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto at = s.find(sep, start);
        out.push_back(s.substr(start, at - start));
        if (at == std::string::npos) {
            return out;
        }
        start = at + sep.size();
    }
}

void parse_omega_range(const std::string& s, d3::SweepOptions& opt) {
    const auto parts = split(s, ":");
    if (parts.size() != 3) {
        throw io::SchemaError("omega range must be A:B:STEP");
    }
    opt.omega_min = parse_double(parts[0], "omega range");
    opt.omega_max = parse_double(parts[1], "omega range");
    opt.omega_step = parse_double(parts[2], "omega range");
    if (!(opt.omega_min > 0.0) || !(opt.omega_max > opt.omega_min) || !(opt.omega_step > 0.0)) {
        throw io::SchemaError("omega range must satisfy 0 < A < B and STEP > 0");
    }
    if ((opt.omega_max - opt.omega_min) / opt.omega_step > 1e7) {
        throw io::SchemaError("omega range has too many samples");
    }
}

void parse_branches(const std::string& s, d3::SweepOptions& opt) {
    const auto parts = split(s, "..");
    if (parts.size() != 2) {
        throw io::SchemaError("branches must be K..L");
    }
    auto to_int = [&](const std::string& x) {
        int v = 0;
        const auto [p, ec] = std::from_chars(x.data(), x.data() + x.size(), v);
        if (ec != std::errc() || p != x.data() + x.size()) {
            throw io::SchemaError("malformed branch bound '" + x + "'");
        }
        return v;
    };
    opt.branch_min = to_int(parts[0]);
    opt.branch_max = to_int(parts[1]);
    if (opt.branch_max < opt.branch_min || opt.branch_min < 0) {
        throw io::SchemaError("branches must satisfy 0 <= K <= L");
    }
}

void parse_window(const std::string& s, double& lo, double& hi, const char* what) {
    const auto parts = split(s, ":");
    if (parts.size() != 2) {
        throw io::SchemaError(std::string(what) + " must be A:B");
    }
    lo = parse_double(parts[0], what);
    hi = parse_double(parts[1], what);
    if (!(hi > lo)) {
        throw io::SchemaError(std::string(what) + " must satisfy A < B");
    }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        io::write_atomic(path, text);
    }
}

json point_json(const d3::DoubleHopfPoint& p) {
    return {{"alpha", p.alpha},   {"beta", p.beta},     {"tau_s", p.tau_s},
            {"tau_n", p.tau_n},   {"omega1", p.omega1}, {"omega2", p.omega2},
            {"residual", p.residual},
            {"seed", {{"sign", p.seed.sign}, {"branch1", p.seed.branch1}, {"branch2", p.seed.branch2}}}};
}

json double_hopf_document(d3::Factor f, double beta, double tau_n, const d3::LocateOptions& opt,
                          const std::vector<d3::DoubleHopfPoint>& pts) {
    json list = json::array();
    for (const auto& p : pts) {
        list.push_back(point_json(p));
    }
    return {{"schema", io::kSchema},
            {"factor", d3::to_string(f)},
            {"beta", beta},
            {"tau_n", tau_n},
            {"window",
             {{"alpha", {opt.window.alpha_min, opt.window.alpha_max}},
              {"tau_s", {opt.window.tau_min, opt.window.tau_max}},
              {"omega", {opt.sweep.omega_min, opt.sweep.omega_max, opt.sweep.omega_step}},
              {"branches", {opt.sweep.branch_min, opt.sweep.branch_max}}}},
            {"policy",
             {{"min_tau", opt.min_tau}, {"min_tau_gap", opt.min_tau_gap}, {"min_other_factor", opt.min_other_factor}}},
            {"points", list}};
}

struct SweepArgs {
    std::string factor = "delta1";
    double beta = -0.5;
    double tau_n = 4.0;
    std::string omega_range = "0.05:5:0.005";
    std::string branches = "0..3";
    std::string output;
};

void add_sweep_flags(CLI::App* sub, SweepArgs& a) {
    sub->add_option("--factor", a.factor, "delta1 or delta2")->capture_default_str();
    sub->add_option("--beta", a.beta, "coupling gain")->capture_default_str();
    sub->add_option("--tau-n", a.tau_n, "coupling delay")->capture_default_str();
    sub->add_option("--omega-range", a.omega_range, "A:B:STEP")->capture_default_str();
    sub->add_option("--branches", a.branches, "K..L")->capture_default_str();
    sub->add_option("-o,--output", a.output, "output file (stdout when omitted)");
}

d3::SweepOptions sweep_options(const SweepArgs& a) {
    d3::SweepOptions opt;
    parse_omega_range(a.omega_range, opt);
    parse_branches(a.branches, opt);
    return opt;
}

d3::Factor factor_arg(const std::string& s) {
    try {
        return d3::parse_factor(s);
    } catch (const Error& e) {
        throw io::SchemaError(e.what());
    }
}

int cmd_curves(const SweepArgs& a, std::ostream& out) {
    const auto opt = sweep_options(a);
    const auto pts = d3::sweep_curves(factor_arg(a.factor), a.beta, a.tau_n, opt);
    std::ostringstream csv;
    d3::write_curves_csv(csv, pts);
    emit(a.output, csv.str(), out);
    return kExitOk;
}

int cmd_double_hopf(const SweepArgs& a, const std::string& alpha_window, const std::string& tau_window,
                    std::ostream& out) {
    d3::LocateOptions opt;
    opt.sweep = sweep_options(a);
    parse_window(alpha_window, opt.window.alpha_min, opt.window.alpha_max, "alpha window");
    parse_window(tau_window, opt.window.tau_min, opt.window.tau_max, "tau window");
    const auto f = factor_arg(a.factor);
    const auto pts = d3::locate_double_hopf(f, a.beta, a.tau_n, opt);
    emit(a.output, io::dump(double_hopf_document(f, a.beta, a.tau_n, opt, pts)), out);
    return pts.empty() ? kExitPipeline : kExitOk;
}

int cmd_unfold(const std::string& config_path, const std::string& preset, const std::string& output, bool all,
               int point_index, std::ostream& out, std::ostream& err) {
    json cfg_json = json::object();
    std::filesystem::path base;
    if (!config_path.empty()) {
        cfg_json = io::read_file(config_path);
        if (!cfg_json.is_object()) {
            throw io::SchemaError("config must be a JSON object");
        }
        base = std::filesystem::path(config_path).parent_path();
    }
    if (!preset.empty()) {
        cfg_json.erase("model");
        cfg_json.erase("model_file");
        cfg_json.erase("lambda_seeds");
        cfg_json["preset"] = preset;
    }
    if (all) {
        cfg_json["select_miniversal"] = false;
    }
    if (point_index >= 0) {
        cfg_json["point_index"] = point_index;
    }
    RunConfig cfg = parse_run_config(cfg_json, base);
    if (!output.empty()) {
        cfg.output = output;
    }
    const auto outcome = unfold(cfg);
    emit(cfg.output ? cfg.output->string() : std::string(), io::dump(outcome.artifact), out);
    if (outcome.exit_code == kExitPipeline) {
        err << "error (" << outcome.artifact["error"]["kind"].get<std::string>()
            << "): " << outcome.artifact["error"]["message"].get<std::string>() << '\n';
    } else if (outcome.exit_code == kExitVersalOnly) {
        err << "family is Gamma-versal but not mini-versal ("
            << outcome.artifact["versality"]["parameter_count"].get<int>() << " parameters, codimension "
            << outcome.artifact["versality"]["codimension"].get<int>() << ")\n";
    }
    return outcome.exit_code;
}

int cmd_verify(const std::string& path, const std::string& report_path, bool json_out, std::ostream& out) {
    const json art = io::read_file(path);
    const auto rep = verify_artifact(art);
    if (json_out) {
        out << io::dump(rep.to_json());
    } else {
        rep.print(out);
    }
    if (!report_path.empty()) {
        io::write_atomic(report_path, io::dump(rep.to_json()));
    }
    return rep.passed() ? kExitOk : kExitPipeline;
}

int cmd_demo(const std::string& dir, std::ostream& out) {
    const std::filesystem::path root = dir.empty() ? std::filesystem::path("d3_demo") : std::filesystem::path(dir);
    int status = kExitOk;
    for (d3::Case c : {d3::Case::Simple, d3::Case::Double}) {
        const auto name = std::string(d3::to_string(c));
        const auto f = d3::factor_of(c);
        const auto [beta, tau_n] = d3::case_window(c);
        d3::LocateOptions opt;
        std::ostringstream csv;
        d3::write_curves_csv(csv, d3::sweep_curves(f, beta, tau_n, opt.sweep));
        io::write_atomic(root / ("curves_" + std::string(d3::to_string(f)) + ".csv"), csv.str());
        const auto pts = d3::locate_double_hopf(f, beta, tau_n, opt);
        io::write_atomic(root / ("double_hopf_" + std::string(d3::to_string(f)) + ".json"),
                         io::dump(double_hopf_document(f, beta, tau_n, opt, pts)));
        RunConfig cfg;
        cfg.preset = c;
        const auto outcome = unfold(cfg);
        io::write_atomic(root / ("unfold_" + name + ".json"), io::dump(outcome.artifact));
        out << "== " << name << " case (" << d3::to_string(f) << ", beta=" << beta << ", tau_n=" << tau_n << ")\n";
        out << "   double-Hopf points located: " << pts.size() << '\n';
        if (outcome.exit_code == kExitPipeline) {
            out << "   pipeline error: " << outcome.artifact["error"]["message"].get<std::string>() << '\n';
            status = kExitPipeline;
            continue;
        }
        const json& a = outcome.artifact;
        const json& p = a["source"]["point"];
        out << "   point: alpha=" << p["alpha"].get<double>() << " tau_s=" << p["tau_s"].get<double>()
            << " omega=(" << p["omega1"].get<double>() << ", " << p["omega2"].get<double>() << ")\n";
        out << "   c=" << a["frame"]["c"].get<int>() << "  codim(orbit)=" << a["orbit"]["codimension"].get<int>()
            << "  theta rank=" << a["theta"]["rank"].get<int>()
            << "  Mat^G=" << a["versality"]["commutant_dim"].get<int>() << " = "
            << a["versality"]["tangent_dim"].get<int>() << " + " << a["versality"]["parameter_count"].get<int>()
            << "  mini-versal=" << (a["versality"]["miniversal"].get<bool>() ? "yes" : "no") << '\n';
        const auto rep = verify_artifact(a);
        out << "   verify: " << (rep.passed() ? "all checks passed" : "FAILED") << " (" << rep.checks.size()
            << " checks)\n";
        if (!rep.passed() || outcome.exit_code != kExitOk) {
            status = kExitPipeline;
        }
    }
    out << "artifacts written to " << root.string() << '\n';
    return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equivariant versal unfoldings of linear delay equations"};
    app.name(args.empty() ? "equnfold" : args.front());
    app.require_subcommand(1);

    SweepArgs curves_args;
    auto* curves = app.add_subcommand("curves", "Hopf curves of a characteristic factor as CSV");
    add_sweep_flags(curves, curves_args);

    SweepArgs dh_args;
    std::string alpha_window = "-4:4";
    std::string tau_window = "0:10";
    auto* dh = app.add_subcommand("double-hopf", "Locate double-Hopf points of a factor");
    add_sweep_flags(dh, dh_args);
    dh->add_option("--alpha-window", alpha_window, "A:B")->capture_default_str();
    dh->add_option("--tau-window", tau_window, "A:B")->capture_default_str();

    std::string config_path;
    std::string preset;
    std::string unfold_output;
    bool all_directions = false;
    int point_index = -1;
    auto* unf = app.add_subcommand("unfold", "Run the unfolding pipeline and write the JSON artifact");
    unf->add_option("--config", config_path, "RunConfig JSON file");
    unf->add_option("--preset", preset, "d3:simple or d3:double");
    unf->add_option("-o,--output", unfold_output, "artifact path (stdout when omitted)");
    unf->add_flag("--all-directions", all_directions, "keep every direction (no mini-versal selection)");
    unf->add_option("--point-index", point_index, "which located double-Hopf point a preset uses");

    std::string artifact_path;
    std::string report_path;
    bool json_out = false;
    auto* ver = app.add_subcommand("verify", "Re-run the invariant checks on an artifact");
    ver->add_option("artifact", artifact_path, "artifact JSON")->required();
    ver->add_option("--report", report_path, "write the JSON report here");
    ver->add_flag("--json", json_out, "print the JSON report instead of text");

    std::string demo_dir;
    auto* demo = app.add_subcommand("d3-demo", "Curves, double-Hopf points and both unfolding cases");
    demo->add_option("-d,--output-dir", demo_dir, "directory for the artifacts");

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (curves->parsed()) {
            return cmd_curves(curves_args, out);
        }
        if (dh->parsed()) {
            return cmd_double_hopf(dh_args, alpha_window, tau_window, out);
        }
        if (unf->parsed()) {
            if (config_path.empty() && preset.empty()) {
                err << "unfold needs --config or --preset\n";
                return kExitUsage;
            }
            return cmd_unfold(config_path, preset, unfold_output, all_directions, point_index, out, err);
        }
        if (ver->parsed()) {
            return cmd_verify(artifact_path, report_path, json_out, out);
        }
        if (demo->parsed()) {
            return cmd_demo(demo_dir, out);
        }
    } catch (const io::SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const io::json::exception& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return kExitPipeline;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPipeline;
    }
    return kExitUsage;
}

}  // namespace equnfold::cli
