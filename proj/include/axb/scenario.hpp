#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "axb/beam_profile.hpp"
#include "axb/cavity.hpp"
#include "axb/errors.hpp"
#include "axb/field_ray.hpp"
#include "axb/io.hpp"
#include "axb/mixing.hpp"
#include "axb/units.hpp"
#include "axb/version.hpp"

namespace axb {

/// One violated configuration rule: the offending field and what it broke.
struct Finding {
    std::string path;
    std::string message;
};

/// Parsed scenario, boundary units (gauss, meters, radians) as loaded.
struct ScenarioConfig {
    std::string name;

    // medium
    double wavelength_m = 0.0;  ///< 0 when omega_ev given directly
    double omega_ev = 0.0;      ///< photon energy [eV]
    double coupling_inv_gev = 0.0;
    double axion_mass_ev = 0.0;

    // field
    double b0_gauss = 0.0;
    double b1_gauss_per_m = 0.0;
    double y0_m = 0.0;
    double y_min_m = -0.5;
    double y_max_m = 0.5;

    // cavity (optional)
    bool has_cavity = false;
    double pass_length_m = 1.0;
    int passes = 1;
    double theta_mode_rad = -1.0;  ///< < 0: derive from the splitting angle
    bool split_from_mixing = false;
    double split_plus = 0.5;
    double split_minus = 0.5;
    bool loss_from_mixing = false;
    double axion_loss = 0.0;

    // beam (optional)
    bool has_beam = false;
    double waist_sigma_m = 0.0;
    double total_power = 1.0;

    double modulation_gain = 1.0;
    IndexModel index_model = IndexModel::symmetric;
    double trajectory_length_m = -1.0;  ///< < 0: cavity pass length, else 1 m
    int trajectory_samples = 33;
    std::string outputs_dir;  ///< empty: resolved by the caller

    nlohmann::json raw;
};

namespace detail {

inline bool is_int(const nlohmann::json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) return true;
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::floor(d) == d && std::fabs(d) < 9.0e15;
    }
    return false;
}

inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed, std::vector<Finding>& out) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            out.push_back({path.empty() ? it.key() : path + "." + it.key(), "unknown key"});
        }
    }
}

/// Fetches a finite number, appending a finding when absent or malformed.
/// Returns true only when `dst` now holds a usable value.
inline bool fetch_num(const nlohmann::json& obj, const std::string& path, const char* key,
                      bool required, double& dst, std::vector<Finding>& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) out.push_back({path + "." + key, "required number is missing"});
        return false;
    }
    if (!it->is_number()) {
        out.push_back({path + "." + key, "must be a number"});
        return false;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
        out.push_back({path + "." + key, "must be finite"});
        return false;
    }
    dst = v;
    return true;
}

} // namespace detail

inline constexpr int max_passes = 50000;  // moment propagation is O(passes^2)

/// Checks every schema and physics rule of a configuration document and
/// reports all violations, not just the first.
inline std::vector<Finding> validate_config(const nlohmann::json& cfg) {
    std::vector<Finding> out;
    if (!cfg.is_object()) {
        out.push_back({"", "configuration must be a JSON object"});
        return out;
    }

    detail::check_keys(cfg, "",
                       {"name", "medium", "field", "cavity", "beam", "modulation_gain",
                        "index_model", "trajectory_length_m", "trajectory_samples",
                        "outputs_dir"},
                       out);

    // name
    if (!cfg.contains("name") || !cfg["name"].is_string() ||
        cfg["name"].get<std::string>().empty()) {
        out.push_back({"name", "required non-empty string"});
    }

    // medium
    if (!cfg.contains("medium") || !cfg["medium"].is_object()) {
        out.push_back({"medium", "required object"});
    } else {
        const auto& m = cfg["medium"];
        const std::string p = "medium";
        detail::check_keys(m, p, {"wavelength_m", "omega_ev", "coupling_inv_gev", "axion_mass_ev"},
                           out);
        const bool has_lambda = m.contains("wavelength_m");
        const bool has_omega = m.contains("omega_ev");
        if (has_lambda == has_omega) {
            out.push_back({p, "exactly one of wavelength_m and omega_ev must be given"});
        }
        double v = 0.0;
        if (has_lambda && detail::fetch_num(m, p, "wavelength_m", true, v, out) && v <= 0.0) {
            out.push_back({p + ".wavelength_m", "must be positive"});
        }
        if (has_omega && detail::fetch_num(m, p, "omega_ev", true, v, out) && v <= 0.0) {
            out.push_back({p + ".omega_ev", "must be positive"});
        }
        if (detail::fetch_num(m, p, "coupling_inv_gev", true, v, out) && v < 0.0) {
            out.push_back({p + ".coupling_inv_gev", "must be non-negative"});
        }
        if (m.contains("axion_mass_ev") &&
            detail::fetch_num(m, p, "axion_mass_ev", false, v, out) && v < 0.0) {
            out.push_back({p + ".axion_mass_ev", "must be non-negative"});
        }
    }

    // field
    if (!cfg.contains("field") || !cfg["field"].is_object()) {
        out.push_back({"field", "required object"});
    } else {
        const auto& f = cfg["field"];
        const std::string p = "field";
        detail::check_keys(f, p, {"b0_gauss", "b1_gauss_per_m", "y0_m", "y_min_m", "y_max_m"},
                           out);
        double b0 = 0.0, b1 = 0.0, y0 = 0.0, ymin = -0.5, ymax = 0.5;
        const bool ok_b0 = detail::fetch_num(f, p, "b0_gauss", true, b0, out);
        const bool ok_b1 = detail::fetch_num(f, p, "b1_gauss_per_m", true, b1, out);
        if (ok_b0 && b0 < 0.0) out.push_back({p + ".b0_gauss", "must be non-negative"});
        if (f.contains("y0_m")) detail::fetch_num(f, p, "y0_m", false, y0, out);
        if (f.contains("y_min_m")) detail::fetch_num(f, p, "y_min_m", false, ymin, out);
        if (f.contains("y_max_m")) detail::fetch_num(f, p, "y_max_m", false, ymax, out);
        if (!(ymin < ymax)) {
            out.push_back({p + ".y_min_m", "transverse domain must have y_min_m < y_max_m"});
        } else {
            if (y0 < ymin || y0 > ymax) {
                out.push_back({p + ".y0_m", "reference point must lie inside the domain"});
            }
            if (ok_b0 && ok_b1 && b0 >= 0.0) {
                if (b0 + b1 * (ymin - y0) < 0.0 || b0 + b1 * (ymax - y0) < 0.0) {
                    out.push_back(
                        {p, "field magnitude becomes negative inside the transverse domain"});
                }
            }
        }
    }

    // cavity
    if (cfg.contains("cavity")) {
        if (!cfg["cavity"].is_object()) {
            out.push_back({"cavity", "must be an object"});
        } else {
            const auto& c = cfg["cavity"];
            const std::string p = "cavity";
            detail::check_keys(
                c, p, {"pass_length_m", "passes", "theta_mode_rad", "split_weights", "axion_loss"},
                out);
            double v = 0.0;
            if (detail::fetch_num(c, p, "pass_length_m", true, v, out) && v <= 0.0) {
                out.push_back({p + ".pass_length_m", "must be positive"});
            }
            if (!c.contains("passes")) {
                out.push_back({p + ".passes", "required integer is missing"});
            } else if (!detail::is_int(c["passes"])) {
                out.push_back({p + ".passes", "must be an integer"});
            } else {
                const double n = c["passes"].get<double>();
                if (n < 1.0 || n > static_cast<double>(max_passes)) {
                    out.push_back({p + ".passes",
                                   "must lie in [1, " + std::to_string(max_passes) + "]"});
                }
            }
            if (c.contains("theta_mode_rad") &&
                detail::fetch_num(c, p, "theta_mode_rad", false, v, out) && v < 0.0) {
                out.push_back({p + ".theta_mode_rad", "must be non-negative"});
            }
            if (c.contains("split_weights")) {
                const auto& w = c["split_weights"];
                if (w.is_string()) {
                    const std::string s = w.get<std::string>();
                    if (s != "equal" && s != "mixing") {
                        out.push_back({p + ".split_weights",
                                       "must be \"equal\", \"mixing\", or a pair of numbers"});
                    }
                } else if (w.is_array() && w.size() == 2 && w[0].is_number() && w[1].is_number()) {
                    const double wp = w[0].get<double>();
                    const double wm = w[1].get<double>();
                    if (wp < 0.0 || wm < 0.0) {
                        out.push_back({p + ".split_weights", "weights must be non-negative"});
                    } else if (std::fabs(wp + wm - 1.0) > 1e-12) {
                        out.push_back({p + ".split_weights", "weights must sum to 1"});
                    }
                } else {
                    out.push_back({p + ".split_weights",
                                   "must be \"equal\", \"mixing\", or a pair of numbers"});
                }
            }
            if (c.contains("axion_loss")) {
                const auto& a = c["axion_loss"];
                if (a.is_string()) {
                    if (a.get<std::string>() != "mixing") {
                        out.push_back(
                            {p + ".axion_loss", "must be \"mixing\" or a number in [0, 1)"});
                    }
                } else if (a.is_number()) {
                    const double loss = a.get<double>();
                    if (!(loss >= 0.0 && loss < 1.0)) {
                        out.push_back({p + ".axion_loss", "must lie in [0, 1)"});
                    }
                } else {
                    out.push_back({p + ".axion_loss", "must be \"mixing\" or a number in [0, 1)"});
                }
            }
        }
    }

    // beam
    if (cfg.contains("beam")) {
        if (!cfg["beam"].is_object()) {
            out.push_back({"beam", "must be an object"});
        } else {
            const auto& b = cfg["beam"];
            const std::string p = "beam";
            detail::check_keys(b, p, {"waist_sigma_m", "total_power"}, out);
            double v = 0.0;
            if (detail::fetch_num(b, p, "waist_sigma_m", true, v, out) && v <= 0.0) {
                out.push_back({p + ".waist_sigma_m", "must be positive"});
            }
            if (b.contains("total_power") && detail::fetch_num(b, p, "total_power", false, v, out) &&
                v <= 0.0) {
                out.push_back({p + ".total_power", "must be positive"});
            }
        }
    }

    double v = 0.0;
    if (cfg.contains("modulation_gain") &&
        detail::fetch_num(cfg, "", "modulation_gain", false, v, out) && v < 1.0) {
        out.push_back({"modulation_gain", "must be at least 1"});
    }
    if (cfg.contains("index_model")) {
        const auto& im = cfg["index_model"];
        if (!im.is_string() ||
            (im.get<std::string>() != "symmetric" && im.get<std::string>() != "exact")) {
            out.push_back({"index_model", "must be \"symmetric\" or \"exact\""});
        }
    }
    if (cfg.contains("trajectory_length_m") &&
        detail::fetch_num(cfg, "", "trajectory_length_m", false, v, out) && v <= 0.0) {
        out.push_back({"trajectory_length_m", "must be positive"});
    }
    if (cfg.contains("trajectory_samples")) {
        if (!detail::is_int(cfg["trajectory_samples"])) {
            out.push_back({"trajectory_samples", "must be an integer"});
        } else {
            const double n = cfg["trajectory_samples"].get<double>();
            if (n < 2.0 || n > 100001.0) {
                out.push_back({"trajectory_samples", "must lie in [2, 100001]"});
            }
        }
    }
    if (cfg.contains("outputs_dir") && !cfg["outputs_dir"].is_string()) {
        out.push_back({"outputs_dir", "must be a string"});
    }
    return out;
}

/// Parses a validated document into a ScenarioConfig. Throws domain_error
/// naming the first violated field when validation fails.
inline ScenarioConfig parse_config(const nlohmann::json& cfg) {
    const auto findings = validate_config(cfg);
    if (!findings.empty()) {
        std::string msg = "invalid configuration: " + findings.front().path + ": " +
                          findings.front().message;
        if (findings.size() > 1) {
            msg += " (and " + std::to_string(findings.size() - 1) + " more finding";
            if (findings.size() > 2) msg += "s";
            msg += ")";
        }
        throw domain_error(msg);
    }

    ScenarioConfig s;
    s.raw = cfg;
    s.name = cfg["name"].get<std::string>();

    const auto& m = cfg["medium"];
    if (m.contains("wavelength_m")) {
        s.wavelength_m = m["wavelength_m"].get<double>();
        s.omega_ev = wavelength_to_omega(s.wavelength_m);
    } else {
        s.omega_ev = m["omega_ev"].get<double>();
        s.wavelength_m = omega_to_wavelength(s.omega_ev);
    }
    s.coupling_inv_gev = m["coupling_inv_gev"].get<double>();
    if (m.contains("axion_mass_ev")) s.axion_mass_ev = m["axion_mass_ev"].get<double>();

    const auto& f = cfg["field"];
    s.b0_gauss = f["b0_gauss"].get<double>();
    s.b1_gauss_per_m = f["b1_gauss_per_m"].get<double>();
    if (f.contains("y0_m")) s.y0_m = f["y0_m"].get<double>();
    if (f.contains("y_min_m")) s.y_min_m = f["y_min_m"].get<double>();
    if (f.contains("y_max_m")) s.y_max_m = f["y_max_m"].get<double>();

    if (cfg.contains("cavity")) {
        s.has_cavity = true;
        const auto& c = cfg["cavity"];
        s.pass_length_m = c["pass_length_m"].get<double>();
        s.passes = static_cast<int>(c["passes"].get<double>());
        if (c.contains("theta_mode_rad")) s.theta_mode_rad = c["theta_mode_rad"].get<double>();
        if (c.contains("split_weights")) {
            const auto& w = c["split_weights"];
            if (w.is_string()) {
                s.split_from_mixing = w.get<std::string>() == "mixing";
            } else {
                s.split_plus = w[0].get<double>();
                s.split_minus = w[1].get<double>();
            }
        }
        if (c.contains("axion_loss")) {
            const auto& a = c["axion_loss"];
            if (a.is_string()) {
                s.loss_from_mixing = true;
            } else {
                s.axion_loss = a.get<double>();
            }
        }
    }

    if (cfg.contains("beam")) {
        s.has_beam = true;
        const auto& b = cfg["beam"];
        s.waist_sigma_m = b["waist_sigma_m"].get<double>();
        if (b.contains("total_power")) s.total_power = b["total_power"].get<double>();
    }

    if (cfg.contains("modulation_gain")) s.modulation_gain = cfg["modulation_gain"].get<double>();
    if (cfg.contains("index_model")) {
        s.index_model = cfg["index_model"].get<std::string>() == "exact" ? IndexModel::exact
                                                                         : IndexModel::symmetric;
    }
    if (cfg.contains("trajectory_length_m")) {
        s.trajectory_length_m = cfg["trajectory_length_m"].get<double>();
    }
    if (cfg.contains("trajectory_samples")) {
        s.trajectory_samples = static_cast<int>(cfg["trajectory_samples"].get<double>());
    }
    if (cfg.contains("outputs_dir")) s.outputs_dir = cfg["outputs_dir"].get<std::string>();
    return s;
}

/// Reads and parses a configuration file. File-system problems surface as
/// io_error; malformed JSON as domain_error (a content problem).
inline nlohmann::json load_config_document(const std::filesystem::path& path) {
    const std::string text = io::read_text_file(path);
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw domain_error("configuration parse error in " + path.string() +
                           ": not well-formed JSON");
    }
    return doc;
}

/// Everything the pipeline computed, kept for report assembly.
struct RunArtifacts {
    MediumParams medium{};
    QTerms qterms{};
    ModeSolution modes{};
    SymmetricIndices sym{};
    LinearFieldProfile field{};
    IndexProfile prof_plus{};
    IndexProfile prof_minus{};
    double path_length = 0.0;
    std::vector<RayState> traj_plus;
    std::vector<RayState> traj_minus;
    SplittingAngles angles{};

    std::optional<double> theta_mode;
    std::optional<CavityResult> cavity;
    std::vector<SpreadCheckpoint> control_checkpoints;
    std::optional<GrowthFit> control_fit;

    std::optional<CompositeProfile> profile;
    std::optional<ProfileMetrics> profile_metrics;
    std::vector<std::array<double, 2>> deficit_law;  ///< (delta/sigma, deficit)
    double deficit_law_exponent = 0.0;
    std::optional<ModulationReport> modulation;
};

namespace detail {

/// Log-log least-squares slope of deficit against relative displacement.
inline double fit_loglog_slope(const std::vector<std::array<double, 2>>& pts) {
    double sx = 0.0, sy = 0.0;
    for (const auto& p : pts) {
        sx += std::log(p[0]);
        sy += std::log(p[1]);
    }
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
        const double dx = std::log(p[0]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p[1]) - my);
    }
    return sxy / sxx;
}

/// Lattice nodes -> displaced, widened beam copies. Nodes carrying no
/// intensity are dropped; the per-node position variance becomes extra
/// Gaussian width, exact for the on-axis and integral metrics used here.
inline std::vector<ProfileCenter> lattice_centers(const std::vector<AngleLatticeSummary>& lattice,
                                                  double total_power) {
    double total_weight = 0.0;
    for (const auto& node : lattice) total_weight += node.weight;
    std::vector<ProfileCenter> centers;
    centers.reserve(lattice.size());
    for (const auto& node : lattice) {
        if (node.weight <= 0.0) continue;
        const double var = std::fmax(0.0, node.m2_y - node.mean_y * node.mean_y);
        centers.push_back(
            ProfileCenter{node.mean_y, node.weight / total_weight * total_power, var});
    }
    if (centers.empty()) centers.push_back(ProfileCenter{0.0, total_power, 0.0});
    return centers;
}

} // namespace detail

/// Runs the full pipeline on a parsed scenario: mixing solution, per-mode
/// ray trajectories, splitting angles, cavity moment propagation, and the
/// composite intensity profile. Optional stages are skipped when their
/// configuration section is absent.
inline RunArtifacts run_pipeline(const ScenarioConfig& cfg) {
    RunArtifacts art;

    // mixing at the field reference point
    const double b0_nat = gauss_to_natural(cfg.b0_gauss);
    const double b1_nat = gradient_gauss_to_natural(cfg.b1_gauss_per_m);
    const double g_nat = coupling_inv_gev_to_inv_ev(cfg.coupling_inv_gev);
    art.medium = MediumParams{cfg.omega_ev, b0_nat, g_nat, cfg.axion_mass_ev};
    art.qterms = compute_q_terms(art.medium);
    art.modes = mode_solution(art.qterms, cfg.omega_ev);
    art.sym = symmetric_indices(art.medium);

    // per-mode linearized index profiles
    art.field = LinearFieldProfile{b0_nat, b1_nat, cfg.y0_m, cfg.y_min_m, cfg.y_max_m};
    art.prof_plus = index_profile(art.medium, art.field, Mode::plus, cfg.index_model);
    art.prof_minus = index_profile(art.medium, art.field, Mode::minus, cfg.index_model);

    // one-pass trajectories from a normal entry at the reference point
    art.path_length = cfg.trajectory_length_m > 0.0
                          ? cfg.trajectory_length_m
                          : (cfg.has_cavity ? cfg.pass_length_m : 1.0);
    const int samples = cfg.trajectory_samples;
    for (const Mode mode : {Mode::plus, Mode::minus}) {
        const IndexProfile& prof = mode == Mode::plus ? art.prof_plus : art.prof_minus;
        std::vector<RayState>& traj = mode == Mode::plus ? art.traj_plus : art.traj_minus;
        const RayState entry{cfg.y0_m, 0.0, 0.0, mode};
        traj.reserve(static_cast<std::size_t>(samples));
        for (int i = 0; i < samples; ++i) {
            const double z = art.path_length * static_cast<double>(i) /
                             static_cast<double>(samples - 1);
            traj.push_back(closed_form_state_at_z(prof, entry, z));
        }
    }

    art.angles = splitting_angle(art.medium, art.field, art.path_length, cfg.index_model);

    // cavity moment propagation
    if (cfg.has_cavity) {
        const double theta = cfg.theta_mode_rad >= 0.0 ? cfg.theta_mode_rad
                                                       : 0.5 * std::fabs(art.angles.delta_theta);
        art.theta_mode = theta;
        CavityConfig cav{};
        cav.pass_length = cfg.pass_length_m;
        cav.passes = cfg.passes;
        cav.theta_mode = theta;
        if (cfg.split_from_mixing) {
            const double c = std::cos(art.modes.phi);
            const double sn = std::sin(art.modes.phi);
            cav.weight_plus = c * c;
            cav.weight_minus = sn * sn;
        } else {
            cav.weight_plus = cfg.split_plus;
            cav.weight_minus = cfg.split_minus;
        }
        if (cfg.loss_from_mixing) {
            const double sn = std::sin(art.modes.phi);
            cav.axion_loss = sn * sn;
            detail::require(cav.axion_loss < 1.0, "run: mixing-derived axion loss reaches 1");
        } else {
            cav.axion_loss = cfg.axion_loss;
        }
        art.cavity = propagate_moments(cav);
        art.control_checkpoints = two_beam_control_checkpoints(cav);
        if (art.control_checkpoints.size() >= 3) {
            bool positive = true;
            double z_lo = art.control_checkpoints.front().z_total;
            double z_hi = z_lo;
            for (const auto& c : art.control_checkpoints) {
                if (!(c.spread > 0.0)) positive = false;
                z_lo = std::fmin(z_lo, c.z_total);
                z_hi = std::fmax(z_hi, c.z_total);
            }
            if (positive && z_hi >= 100.0 * z_lo) {
                art.control_fit = fit_growth_exponent(art.control_checkpoints);
            }
        }
    }

    // beam profile
    if (cfg.has_beam) {
        const GaussianBeam beam{cfg.waist_sigma_m, cfg.total_power};
        std::vector<ProfileCenter> centers;
        if (art.cavity) {
            centers = detail::lattice_centers(art.cavity->lattice, cfg.total_power);
        } else {
            centers.push_back(ProfileCenter{0.0, cfg.total_power, 0.0});
        }
        art.profile = compose_intensity(beam, std::move(centers));
        art.profile_metrics = metrics(*art.profile, beam);

        // displacement law: two displaced copies over delta/sigma in [1e-5, 1e-3]
        for (int k = 0; k <= 8; ++k) {
            const double r = std::pow(10.0, -5.0 + 0.25 * static_cast<double>(k));
            const double delta = r * beam.waist_sigma;
            CompositeProfile two;
            two.sigma = beam.waist_sigma;
            two.centers = {ProfileCenter{-delta, 0.5 * cfg.total_power, 0.0},
                           ProfileCenter{delta, 0.5 * cfg.total_power, 0.0}};
            art.deficit_law.push_back({r, central_deficit(two, beam)});
        }
        art.deficit_law_exponent = detail::fit_loglog_slope(art.deficit_law);

        art.modulation =
            modulation_report(art.profile_metrics->central_deficit, cfg.modulation_gain);
    }
    return art;
}

inline constexpr const char* modulation_gain_provenance =
    "user-supplied input; not derived from field dynamics";

namespace detail {

inline nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline nlohmann::json reference_row(const char* label, nlohmann::json expected,
                                    nlohmann::json computed, const char* note) {
    nlohmann::json row;
    row["label"] = label;
    row["expected"] = std::move(expected);
    row["computed"] = std::move(computed);
    row["note"] = note;
    return row;
}

/// Benchmark table for the two shipped configuration families: each row
/// pairs a quoted order-of-magnitude target with the run's own number.
inline nlohmann::json reference_points(const ScenarioConfig& cfg, const RunArtifacts& art) {
    nlohmann::json rows = nlohmann::json::array();
    if (cfg.name == "lab_cavity") {
        rows.push_back(reference_row(
            "coupling_strength_inv_gev", 1e-10, cfg.coupling_inv_gev,
            "experimental upper bound on the coupling, adopted for this configuration"));
        rows.push_back(reference_row("field_strength_gauss", 1e5, cfg.b0_gauss,
                                     "upper end of the quoted 1e4-1e5 G laboratory range"));
        rows.push_back(reference_row("field_gradient_gauss_per_m", 1e6, cfg.b1_gauss_per_m,
                                     "typical laboratory transverse gradient"));
        rows.push_back(reference_row("field_region_length_m", 1.0, art.path_length,
                                     "in-field path per pass"));
        rows.push_back(reference_row("wavelength_m", 1e-6, cfg.wavelength_m, "optical beam"));
        rows.push_back(reference_row(
            "geometric_factor", 50.0,
            art.angles.f_geometric ? nlohmann::json(*art.angles.f_geometric) : nlohmann::json(),
            "quoted for a mid-range field strength; equals 10 at the shipped 1e5 G"));
        rows.push_back(reference_row(
            "splitting_angle_per_coupling_rad_gev", 1e-5,
            cfg.coupling_inv_gev > 0.0
                ? nlohmann::json(art.angles.delta_theta / cfg.coupling_inv_gev)
                : nlohmann::json(),
            "single-pass splitting angle per unit coupling in 1/GeV"));
        rows.push_back(reference_row("splitting_angle_rad", 1.6e-15, art.angles.delta_theta,
                                     "single pass at the adopted coupling bound"));
        rows.push_back(reference_row(
            "mirror_limited_path_m", 1e5, nlohmann::json(),
            "reflectivity ceiling on the folded path; a technology figure, not simulated"));
        rows.push_back(reference_row(
            "linear_accumulated_angle_rad", 1e-10, art.angles.delta_theta * 1e5,
            "two-beam accumulation over the full 1e5 m mirror-limited path, no re-splitting"));
        if (art.cavity) {
            rows.push_back(reference_row(
                "folded_path_m", 1e4,
                static_cast<double>(cfg.passes) * cfg.pass_length_m,
                "distance after which re-splitting reaches the quoted separation"));
            rows.push_back(reference_row(
                "mean_separation_m", 1e-9, art.cavity->report.weighted_separation,
                "intensity-weighted mean |offset| after the folded path"));
            rows.push_back(reference_row(
                "bifurcation_growth_exponent", std::sqrt(2.0),
                finite_or_null(art.cavity->report.fitted_exponent),
                "fitted from spread checkpoints; the equal-split moment recursion gives 3/2"));
        }
        if (art.profile_metrics) {
            rows.push_back(reference_row(
                "instantaneous_central_drop", 1e-9, art.profile_metrics->central_deficit,
                "scales as (separation/waist)^2; matches the quoted order near a 2e-5 m waist, "
                "the shipped waist is 1e-3 m"));
            rows.push_back(reference_row(
                "modulated_central_drop", 1e-4,
                modulation_report(1e-9, cfg.modulation_gain).reported,
                "the quoted instantaneous drop scaled by the gain; the gain is a user-supplied "
                "input, not derived"));
        }
    } else if (cfg.name == "magnetar") {
        rows.push_back(reference_row("field_strength_gauss", 1e16, cfg.b0_gauss,
                                     "surface field scale of a strongly magnetized star"));
        rows.push_back(reference_row("field_gradient_gauss_per_m", 1e11, cfg.b1_gauss_per_m,
                                     "gradient matching the quoted geometric factor"));
        rows.push_back(reference_row(
            "stellar_radius_m", 1e5, nlohmann::json(),
            "length-scale context; the run folds a 1e4 m in-field path"));
        rows.push_back(reference_row(
            "geometric_factor", 0.1,
            art.angles.f_geometric ? nlohmann::json(*art.angles.f_geometric) : nlohmann::json(),
            "inhomogeneity factor (b1/b0) L"));
        rows.push_back(reference_row("splitting_angle_rad", 1e-2, art.angles.delta_theta,
                                     "order-of-magnitude radio-band splitting"));
    }
    return rows;
}

} // namespace detail

/// Paths and summary numbers of one completed run.
struct ResultBundle {
    std::filesystem::path out_dir;
    std::vector<std::string> files;
    RunArtifacts artifacts;
    std::string config_hash;
};

/// Executes a scenario and writes every output file into out_dir. All
/// numbers are serialized with fixed 17-significant-digit formatting, so
/// identical configurations produce byte-identical files.
inline ResultBundle run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    RunArtifacts art = run_pipeline(cfg);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory: " + out_dir.string());

    ResultBundle bundle;
    bundle.out_dir = out_dir;

    const auto emit = [&](const char* name, const std::string& content) {
        io::write_text_file(out_dir / name, content);
        bundle.files.push_back(name);
    };
    const auto g17 = [](double v) { return io::format_g17(v); };

    // indices.json
    {
        nlohmann::json j;
        j["q_terms_ev2"] = {{"q_gamma", art.qterms.q_gamma},
                            {"q_a", art.qterms.q_a},
                            {"q_m", art.qterms.q_m}};
        j["eigenvalues_ev2"] = {{"lambda_plus", art.modes.lambda_plus},
                                {"lambda_minus", art.modes.lambda_minus}};
        j["indices"] = {{"n_plus", art.modes.n_plus},
                        {"n_minus", art.modes.n_minus},
                        {"delta_n_plus", art.modes.delta_n_plus},
                        {"delta_n_minus", art.modes.delta_n_minus}};
        j["mixing_angle_rad"] = art.modes.phi;
        j["symmetric_limit"] = {{"beta", art.sym.beta},
                                {"n_plus", art.sym.n_plus},
                                {"n_minus", art.sym.n_minus}};
        emit("indices.json", io::json_dump17(j));
    }

    // trajectories.csv
    {
        std::string csv = "mode,z_m,y_m,l_y\n";
        for (const auto* traj : {&art.traj_plus, &art.traj_minus}) {
            for (const RayState& s : *traj) {
                csv += to_string(s.mode);
                csv += ',';
                csv += g17(s.z);
                csv += ',';
                csv += g17(s.y);
                csv += ',';
                csv += g17(s.l_y);
                csv += '\n';
            }
        }
        emit("trajectories.csv", csv);
    }

    if (art.cavity) {
        // lattice.csv
        {
            std::string csv = "angle_index,angle_rad,weight,mean_y_m,std_y_m\n";
            for (const auto& node : art.cavity->lattice) {
                const double var = std::fmax(0.0, node.m2_y - node.mean_y * node.mean_y);
                csv += std::to_string(node.angle_index);
                csv += ',';
                csv += g17(static_cast<double>(node.angle_index) * *art.theta_mode);
                csv += ',';
                csv += g17(node.weight);
                csv += ',';
                csv += g17(node.mean_y);
                csv += ',';
                csv += g17(std::sqrt(var));
                csv += '\n';
            }
            emit("lattice.csv", csv);
        }

        // spread.json
        {
            const SpreadReport& rep = art.cavity->report;
            nlohmann::json j;
            j["passes"] = cfg.passes;
            j["pass_length_m"] = cfg.pass_length_m;
            j["theta_mode_rad"] = *art.theta_mode;
            nlohmann::json cps = nlohmann::json::array();
            for (const auto& c : rep.checkpoints) {
                cps.push_back({{"z_m", c.z_total}, {"spread_m", c.spread}});
            }
            j["checkpoints"] = std::move(cps);
            j["std_y_m"] = rep.std_y;
            j["weighted_separation_m"] = rep.weighted_separation;
            if (std::isfinite(rep.fitted_exponent)) {
                j["growth_fit"] = {{"exponent", rep.fitted_exponent},
                                   {"rms_log_residual", rep.fit_residual}};
            } else {
                j["growth_fit"] = nullptr;
            }
            nlohmann::json ctrl;
            nlohmann::json ctrl_cps = nlohmann::json::array();
            for (const auto& c : art.control_checkpoints) {
                ctrl_cps.push_back({{"z_m", c.z_total}, {"spread_m", c.spread}});
            }
            ctrl["checkpoints"] = std::move(ctrl_cps);
            if (art.control_fit) {
                ctrl["growth_fit"] = {{"exponent", art.control_fit->exponent},
                                      {"rms_log_residual", art.control_fit->residual}};
            } else {
                ctrl["growth_fit"] = nullptr;
            }
            j["two_beam_control"] = std::move(ctrl);
            j["references"] = {
                {"bifurcation_growth_power", std::sqrt(2.0)},
                {"moment_recursion_growth_power", 1.5},
                {"linear_growth_power", 1.0},
                {"equal_split_std_m",
                 affine_walk_std(*art.theta_mode, cfg.pass_length_m, cfg.passes)},
            };
            emit("spread.json", io::json_dump17(j));
        }
    }

    if (art.profile) {
        // profile.csv
        {
            std::string csv = "y_m,intensity\n";
            csv.reserve(art.profile->grid_y.size() * 48 + 16);
            for (std::size_t i = 0; i < art.profile->grid_y.size(); ++i) {
                csv += g17(art.profile->grid_y[i]);
                csv += ',';
                csv += g17(art.profile->grid_intensity[i]);
                csv += '\n';
            }
            emit("profile.csv", csv);
        }

        // metrics.json
        {
            const GaussianBeam beam{cfg.waist_sigma_m, cfg.total_power};
            nlohmann::json j;
            j["peak_position_m"] = art.profile_metrics->peak_position;
            j["peak_intensity"] = art.profile_metrics->peak_intensity;
            j["fwhm_m"] = art.profile_metrics->fwhm;
            j["fwhm_reference_m"] = fwhm_reference(beam);
            j["central_deficit"] = art.profile_metrics->central_deficit;
            nlohmann::json law = nlohmann::json::array();
            for (const auto& p : art.deficit_law) {
                law.push_back({{"delta_over_sigma", p[0]}, {"deficit", p[1]}});
            }
            j["displacement_law"] = {{"points", std::move(law)},
                                     {"fitted_exponent", art.deficit_law_exponent}};
            j["modulation"] = {{"input_deficit", art.modulation->input_deficit},
                               {"gain", art.modulation->gain},
                               {"reported_deficit", art.modulation->reported},
                               {"gain_provenance", modulation_gain_provenance}};
            emit("metrics.json", io::json_dump17(j));
        }
    }

    // manifest.json
    {
        const std::string canonical_config = io::json_dump17(cfg.raw);
        bundle.config_hash = io::hex_u64(io::fnv1a64(canonical_config));

        nlohmann::json derived;
        derived["omega_ev"] = cfg.omega_ev;
        derived["wavelength_m"] = cfg.wavelength_m;
        derived["b0_ev2"] = art.field.b0;
        derived["b1_ev2_per_m"] = art.field.b1;
        derived["q_gamma_ev2"] = art.qterms.q_gamma;
        derived["q_a_ev2"] = art.qterms.q_a;
        derived["q_m_ev2"] = art.qterms.q_m;
        derived["mixing_angle_rad"] = art.modes.phi;
        derived["beta"] = art.sym.beta;
        derived["n_plus"] = art.modes.n_plus;
        derived["n_minus"] = art.modes.n_minus;
        derived["delta_n_plus"] = art.modes.delta_n_plus;
        derived["delta_n_minus"] = art.modes.delta_n_minus;
        derived["index_gradient_plus_per_m"] = art.prof_plus.b;
        derived["index_gradient_minus_per_m"] = art.prof_minus.b;
        derived["path_length_m"] = art.path_length;
        derived["theta_plus_rad"] = art.angles.theta_plus;
        derived["theta_minus_rad"] = art.angles.theta_minus;
        derived["delta_theta_rad"] = art.angles.delta_theta;
        derived["geometric_factor"] =
            art.angles.f_geometric ? nlohmann::json(*art.angles.f_geometric) : nlohmann::json();
        if (art.cavity) {
            derived["theta_mode_rad"] = *art.theta_mode;
            derived["passes"] = cfg.passes;
            derived["folded_path_m"] = static_cast<double>(cfg.passes) * cfg.pass_length_m;
            derived["std_y_m"] = art.cavity->report.std_y;
            derived["weighted_separation_m"] = art.cavity->report.weighted_separation;
            derived["growth_exponent"] =
                detail::finite_or_null(art.cavity->report.fitted_exponent);
            derived["control_growth_exponent"] =
                art.control_fit ? nlohmann::json(art.control_fit->exponent) : nlohmann::json();
        }
        if (art.profile_metrics) {
            derived["waist_sigma_m"] = cfg.waist_sigma_m;
            derived["fwhm_m"] = art.profile_metrics->fwhm;
            derived["central_deficit"] = art.profile_metrics->central_deficit;
            derived["modulated_deficit"] = art.modulation->reported;
        }

        nlohmann::json j;
        j["name"] = cfg.name;
        j["app_version"] = app_version;
        j["format_version"] = format_version;
        j["config"] = cfg.raw;
        j["config_hash_fnv1a64"] = bundle.config_hash;
        j["derived"] = std::move(derived);
        j["modulation_gain"] = cfg.modulation_gain;
        j["modulation_gain_provenance"] = modulation_gain_provenance;
        j["reference_points"] = detail::reference_points(cfg, art);
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : bundle.files) files.push_back(f);
        files.push_back("manifest.json");
        j["outputs"] = std::move(files);
        emit("manifest.json", io::json_dump17(j));
    }

    bundle.artifacts = std::move(art);
    return bundle;
}

} // namespace axb
