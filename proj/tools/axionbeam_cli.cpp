// Command-line runner: validates scenario files, executes the simulation
// pipeline, and ships the built-in parameter presets.
//
// Exit codes: 0 success, 1 validation failure, 2 physics-domain error,
// 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "axb/axb.hpp"
#include "presets_data.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_physics = 2;
constexpr int exit_io = 3;

const char* preset_text(const std::string& name) {
    if (name == "lab_cavity") return axb::presets::lab_cavity;
    if (name == "magnetar") return axb::presets::magnetar;
    return nullptr;
}

int load_document(const std::filesystem::path& path, nlohmann::json& doc) {
    try {
        doc = axb::load_config_document(path);
    } catch (const axb::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const axb::domain_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_validation;
    }
    return exit_ok;
}

int report_findings(const std::vector<axb::Finding>& findings) {
    for (const auto& f : findings) {
        std::cerr << "finding: " << (f.path.empty() ? "(document)" : f.path) << ": " << f.message
                  << "\n";
    }
    std::cerr << findings.size() << " finding" << (findings.size() == 1 ? "" : "s") << "\n";
    return exit_validation;
}

int run_command(const std::filesystem::path& config_path, const std::optional<std::string>& out,
                const std::optional<int>& passes, bool quiet) {
    nlohmann::json doc;
    if (const int rc = load_document(config_path, doc); rc != exit_ok) return rc;

    const auto findings = axb::validate_config(doc);
    if (!findings.empty()) return report_findings(findings);

    axb::ScenarioConfig cfg = axb::parse_config(doc);
    if (passes) {
        if (!cfg.has_cavity) {
            std::cerr << "finding: cavity: --passes given but the scenario has no cavity section\n";
            return exit_validation;
        }
        cfg.passes = *passes;
        cfg.raw["cavity"]["passes"] = *passes;  // the manifest echoes what actually ran
    }

    std::filesystem::path out_dir;
    if (out) {
        out_dir = *out;
    } else if (!cfg.outputs_dir.empty()) {
        out_dir = cfg.outputs_dir;
    } else {
        out_dir = std::filesystem::path("out") / cfg.name;
    }

    axb::ResultBundle bundle;
    try {
        bundle = axb::run_scenario(cfg, out_dir);
    } catch (const axb::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const axb::error& e) {
        std::cerr << "physics error: " << e.what() << "\n";
        return exit_physics;
    }

    if (!quiet) {
        const axb::RunArtifacts& art = bundle.artifacts;
        std::cout << "scenario: " << cfg.name << "\n";
        std::cout << "config hash: " << bundle.config_hash << "\n";
        std::cout << "omega_ev: " << axb::io::format_g17(cfg.omega_ev) << "\n";
        std::cout << "delta_n_plus: " << axb::io::format_g17(art.modes.delta_n_plus) << "\n";
        std::cout << "delta_n_minus: " << axb::io::format_g17(art.modes.delta_n_minus) << "\n";
        std::cout << "delta_theta_rad: " << axb::io::format_g17(art.angles.delta_theta) << "\n";
        if (art.angles.f_geometric) {
            std::cout << "geometric_factor: " << axb::io::format_g17(*art.angles.f_geometric)
                      << "\n";
        }
        if (art.cavity) {
            std::cout << "std_y_m: " << axb::io::format_g17(art.cavity->report.std_y) << "\n";
            std::cout << "weighted_separation_m: "
                      << axb::io::format_g17(art.cavity->report.weighted_separation) << "\n";
            if (std::isfinite(art.cavity->report.fitted_exponent)) {
                std::cout << "growth_exponent: "
                          << axb::io::format_g17(art.cavity->report.fitted_exponent) << "\n";
            }
        }
        if (art.profile_metrics) {
            std::cout << "central_deficit: "
                      << axb::io::format_g17(art.profile_metrics->central_deficit) << "\n";
            std::cout << "fwhm_m: " << axb::io::format_g17(art.profile_metrics->fwhm) << "\n";
        }
        std::cout << "wrote " << bundle.files.size() << " files to " << bundle.out_dir.string()
                  << "\n";
    }
    return exit_ok;
}

int validate_command(const std::filesystem::path& config_path) {
    nlohmann::json doc;
    if (const int rc = load_document(config_path, doc); rc != exit_ok) return rc;
    const auto findings = axb::validate_config(doc);
    if (!findings.empty()) return report_findings(findings);
    std::cout << "valid: 0 findings\n";
    return exit_ok;
}

int preset_command(const std::string& name, bool emit) {
    const char* text = preset_text(name);
    if (text == nullptr) {
        std::cerr << "unknown preset: " << name << " (available: lab_cavity, magnetar)\n";
        return exit_validation;
    }
    if (emit) {
        std::cout << text;
        return exit_ok;
    }
    const nlohmann::json doc = nlohmann::json::parse(text);
    std::cout << name << ":\n";
    std::cout << "  omega source: "
              << (doc["medium"].contains("wavelength_m") ? "wavelength_m" : "omega_ev") << "\n";
    std::cout << "  b0_gauss: " << axb::io::format_g17(doc["field"]["b0_gauss"].get<double>())
              << "\n";
    std::cout << "  b1_gauss_per_m: "
              << axb::io::format_g17(doc["field"]["b1_gauss_per_m"].get<double>()) << "\n";
    std::cout << "  cavity: " << (doc.contains("cavity") ? "yes" : "no") << "\n";
    std::cout << "  beam: " << (doc.contains("beam") ? "yes" : "no") << "\n";
    std::cout << "use --emit to print the full configuration document\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photon-axion beam splitting simulator"};
    app.require_subcommand(1);

    std::string config_file;
    std::string out_dir;
    int passes = 0;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write result files");
    run->add_option("config", config_file, "scenario configuration file")->required();
    run->add_option("--out", out_dir, "output directory (default: out/<name>)");
    run->add_option("--passes", passes, "override the number of cavity passes")
        ->check(CLI::Range(1, axb::max_passes));
    run->add_flag("--quiet", quiet, "suppress the summary printed to standard output");

    CLI::App* validate = app.add_subcommand("validate", "check a scenario file, report findings");
    validate->add_option("config", config_file, "scenario configuration file")->required();

    std::string preset_name;
    bool emit = false;
    CLI::App* preset = app.add_subcommand("preset", "inspect or emit a built-in preset");
    preset->add_option("name", preset_name, "preset name: lab_cavity or magnetar")->required();
    preset->add_flag("--emit", emit, "print the preset configuration document to standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_validation;
    }

    if (run->parsed()) {
        return run_command(config_file,
                           run->count("--out") ? std::optional<std::string>(out_dir) : std::nullopt,
                           run->count("--passes") ? std::optional<int>(passes) : std::nullopt,
                           quiet);
    }
    if (validate->parsed()) return validate_command(config_file);
    return preset_command(preset_name, emit);
}
