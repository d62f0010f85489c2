#pragma once

#include <algorithm>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlikit/errors.hpp"
#include "nlikit/spp.hpp"
#include "nlikit/units.hpp"

namespace nlikit {

/// beta2_eff convention used when no per-pair override is given:
/// beta2_ref + pi * beta3_ref * (f_cut + f_nch), frequencies relative to the
/// beta2 reference. An explicit per-pair value always takes precedence.
inline double effective_dispersion_default(double beta2_ref, double beta3_ref, double f_cut,
                                           double f_nch) {
    return beta2_ref + std::numbers::pi * beta3_ref * (f_cut + f_nch);
}

struct Channel {
    int index = 0;
    double f_center = 0.0;   // Hz, offset from the scenario reference frequency
    double symbol_rate = 0.0;  // baud
    double p_launch = 0.0;   // W
    double gamma_sci = 0.0;  // 1/(W m)
    double alpha = 0.0;      // intrinsic field attenuation, 1/m (used by SPP providers)
    std::map<int, double> gamma_xci_on;   // CUT index -> 1/(W m)
    std::map<int, double> beta2_eff_on;   // CUT index -> s^2/m; own index = SCI value

    double band_lo() const { return f_center - symbol_rate / 2.0; }
    double band_hi() const { return f_center + symbol_rate / 2.0; }
};

struct PumpSpec {
    double f_abs = 0.0;   // Hz
    double power = 0.0;   // W
    double alpha = 0.0;   // 1/m
    bool backward = true;
};

struct SppSpec {
    enum class Type { flat, analytic, raman_ode, external };
    Type type = Type::flat;
    std::vector<AnalyticAlphaParams> analytic;  // one per channel (analytic)
    std::vector<PumpSpec> pumps;                // raman_ode
    std::string external_path;                  // external
};

struct LumpedLoss {
    double z = 0.0;       // m
    double loss_dB = 0.0;
};

struct Span {
    double length = 0.0;  // m
    SppSpec spp;
    std::vector<LumpedLoss> lumped;
    // Per-channel post-span amplifier gain, dB. Empty = transparent (the
    // amplifier exactly restores each channel's launch power).
    std::vector<double> post_span_gain_dB;
    bool transparent = true;
};

struct ScenarioOptions {
    double f_ref = 193.4e12;      // absolute frequency of the f=0 offset, Hz
    double beta2_ref = 0.0;       // s^2/m at the reference frequency
    double beta3_ref = 0.0;       // s^3/m
    int fit_degree = 5;
    size_t grid_points = kDefaultSppGridPoints;
    RamanParams raman;
};

struct LinkScenario {
    std::vector<Channel> channels;
    std::vector<Span> spans;
    std::vector<int> cut_indices;
    std::vector<double> rho_correction;  // per channel, default 1.0
    ScenarioOptions options;

    const Channel& channel_by_index(int idx) const {
        for (const auto& c : channels)
            if (c.index == idx) return c;
        throw ValidationError("no channel with index " + std::to_string(idx));
    }

    void validate() const {
        if (spans.empty()) throw ValidationError("scenario: at least one span required");
        for (const auto& ch : channels) {
            const std::string tag = "channel " + std::to_string(ch.index);
            if (!(ch.symbol_rate > 0.0)) throw ValidationError(tag + ": symbol rate must be > 0");
            if (!(ch.p_launch > 0.0)) throw ValidationError(tag + ": launch power must be > 0");
            if (ch.gamma_sci < 0.0) throw ValidationError(tag + ": gamma must be >= 0");
            for (const auto& [cut, g] : ch.gamma_xci_on)
                if (g < 0.0) throw ValidationError(tag + ": XCI gamma must be >= 0");
        }
        for (size_t i = 0; i < channels.size(); ++i)
            for (size_t j = i + 1; j < channels.size(); ++j) {
                const auto& a = channels[i];
                const auto& b = channels[j];
                if (a.band_lo() < b.band_hi() && b.band_lo() < a.band_hi())
                    throw ValidationError("channels " + std::to_string(a.index) + " and " +
                                          std::to_string(b.index) + " overlap spectrally");
            }
        for (int cut : cut_indices)
            if (std::none_of(channels.begin(), channels.end(),
                             [&](const Channel& c) { return c.index == cut; }))
                throw ValidationError("cut index " + std::to_string(cut) + " is not a channel");
        for (size_t s = 0; s < spans.size(); ++s) {
            if (!(spans[s].length > 0.0))
                throw ValidationError("span " + std::to_string(s) + ": length must be > 0");
            for (const auto& ll : spans[s].lumped)
                if (!(ll.z > 0.0) || !(ll.z < spans[s].length))
                    throw ValidationError("span " + std::to_string(s) +
                                          ": lumped loss position outside the span");
        }
    }

    double beta2_eff(const Channel& source, const Channel& cut) const {
        if (auto it = source.beta2_eff_on.find(cut.index); it != source.beta2_eff_on.end())
            return it->second;
        return effective_dispersion_default(options.beta2_ref, options.beta3_ref, cut.f_center,
                                            source.f_center);
    }

    double gamma_xci(const Channel& source, const Channel& cut) const {
        if (auto it = source.gamma_xci_on.find(cut.index); it != source.gamma_xci_on.end())
            return it->second;
        return source.gamma_sci;
    }

    double rho(int cut_index) const {
        for (size_t i = 0; i < channels.size(); ++i)
            if (channels[i].index == cut_index && i < rho_correction.size())
                return rho_correction[i];
        return 1.0;
    }
};

// ---------------------------------------------------------------------------
// JSON configuration boundary. Engineering units in the file, SI inside.
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline double require_num(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw ParseError(where + ": missing required field '" + key + "'");
    if (!obj[key].is_number())
        throw ParseError(where + ": field '" + key + "' must be a number");
    return obj[key].get<double>();
}

inline double num_or(const json& obj, const std::string& key, double fallback,
                     const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw ParseError(where + ": field '" + key + "' must be a number");
    return obj[key].get<double>();
}

}  // namespace detail

inline LinkScenario load_scenario(const std::string& config_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("scenario: top level must be an object");
    LinkScenario sc;

    const auto opt = j.value("options", nlohmann::json::object());
    sc.options.f_ref = units::thz_to_hz(detail::num_or(opt, "f_ref_THz", 193.4, "options"));
    sc.options.beta2_ref =
        units::ps2_per_km_to_si(detail::num_or(opt, "beta2_ps2_km", 0.0, "options"));
    sc.options.beta3_ref =
        units::ps3_per_km_to_si(detail::num_or(opt, "beta3_ps3_km", 0.0, "options"));
    sc.options.fit_degree = static_cast<int>(detail::num_or(opt, "fit_degree", 5, "options"));
    sc.options.grid_points = static_cast<size_t>(
        detail::num_or(opt, "grid_points", static_cast<double>(kDefaultSppGridPoints), "options"));
    if (opt.contains("raman")) {
        const auto& rj = opt["raman"];
        sc.options.raman.gain_slope = units::raman_slope_to_si(
            detail::num_or(rj, "gain_slope_1_per_W_km_THz", 0.0, "options.raman"));
        sc.options.raman.df_max =
            units::thz_to_hz(detail::num_or(rj, "df_max_THz", 15.0, "options.raman"));
        sc.options.raman.rel_tol = detail::num_or(rj, "rel_tol", 1e-4, "options.raman");
        sc.options.raman.max_iterations =
            static_cast<int>(detail::num_or(rj, "max_iterations", 50, "options.raman"));
    }
    const double default_loss = detail::num_or(opt, "loss_dB_km", 0.2, "options");

    if (!j.contains("channels") || !j["channels"].is_array() || j["channels"].empty())
        throw ParseError("scenario: 'channels' must be a non-empty array");
    int auto_index = 0;
    for (const auto& cj : j["channels"]) {
        const std::string where = "channels[" + std::to_string(auto_index) + "]";
        Channel ch;
        ch.index = static_cast<int>(detail::num_or(cj, "index", auto_index, where));
        ch.f_center = units::ghz_to_hz(detail::require_num(cj, "f_GHz", where));
        ch.symbol_rate = units::gbaud_to_baud(detail::require_num(cj, "R_GBaud", where));
        ch.p_launch = units::dbm_to_w(detail::require_num(cj, "P_dBm", where));
        ch.gamma_sci = units::per_w_km_to_si(detail::require_num(cj, "gamma_1_per_W_km", where));
        ch.alpha = units::loss_db_per_km_to_alpha(
            detail::num_or(cj, "loss_dB_km", default_loss, where));
        if (cj.contains("gamma_xci_1_per_W_km")) {
            if (!cj["gamma_xci_1_per_W_km"].is_object())
                throw ParseError(where + ": 'gamma_xci_1_per_W_km' must map CUT index to value");
            for (const auto& [k, v] : cj["gamma_xci_1_per_W_km"].items())
                ch.gamma_xci_on[std::stoi(k)] = units::per_w_km_to_si(v.get<double>());
        }
        if (cj.contains("beta2_eff_ps2_km")) {
            if (!cj["beta2_eff_ps2_km"].is_object())
                throw ParseError(where + ": 'beta2_eff_ps2_km' must map CUT index to value");
            for (const auto& [k, v] : cj["beta2_eff_ps2_km"].items())
                ch.beta2_eff_on[std::stoi(k)] = units::ps2_per_km_to_si(v.get<double>());
        }
        sc.channels.push_back(std::move(ch));
        ++auto_index;
    }

    if (!j.contains("spans") || !j["spans"].is_array() || j["spans"].empty())
        throw ParseError("scenario: 'spans' must be a non-empty array");
    size_t span_no = 0;
    for (const auto& sj : j["spans"]) {
        const std::string where = "spans[" + std::to_string(span_no) + "]";
        Span sp;
        sp.length = units::km_to_m(detail::require_num(sj, "length_km", where));
        const auto spp = sj.value("spp", nlohmann::json{{"type", "flat"}});
        const std::string type = spp.value("type", "flat");
        if (type == "flat") {
            sp.spp.type = SppSpec::Type::flat;
        } else if (type == "analytic") {
            sp.spp.type = SppSpec::Type::analytic;
            auto per_channel = [&](const char* key) {
                std::vector<double> out(sc.channels.size(), 0.0);
                if (!spp.contains(key)) return out;
                if (spp[key].is_number()) {
                    std::fill(out.begin(), out.end(), spp[key].get<double>());
                } else if (spp[key].is_array()) {
                    if (spp[key].size() != sc.channels.size())
                        throw ParseError(where + ".spp: '" + key +
                                         "' array length must match channel count");
                    for (size_t i = 0; i < out.size(); ++i) out[i] = spp[key][i].get<double>();
                } else {
                    throw ParseError(where + ".spp: '" + key + "' must be number or array");
                }
                return out;
            };
            const auto a0 = per_channel("alpha0_1_km");
            const auto a1 = per_channel("alpha1_1_km");
            const auto sg = per_channel("sigma_1_km");
            for (size_t i = 0; i < sc.channels.size(); ++i) {
                AnalyticAlphaParams ap{units::per_km_to_si(a0[i]), units::per_km_to_si(a1[i]),
                                       units::per_km_to_si(sg[i])};
                try {
                    ap.validate();
                } catch (const ValidationError& e) {
                    throw ValidationError(where + ".spp, channel " + std::to_string(i) + ": " +
                                          e.what());
                }
                sp.spp.analytic.push_back(ap);
            }
        } else if (type == "raman_ode") {
            sp.spp.type = SppSpec::Type::raman_ode;
            for (const auto& pj : spp.value("pumps", nlohmann::json::array())) {
                PumpSpec p;
                if (pj.contains("f_abs_THz"))
                    p.f_abs = units::thz_to_hz(pj["f_abs_THz"].get<double>());
                else
                    p.f_abs = sc.options.f_ref +
                              units::ghz_to_hz(detail::require_num(pj, "f_GHz", where + ".pumps"));
                p.power = 1e-3 * detail::require_num(pj, "P_mW", where + ".pumps");
                p.alpha = units::loss_db_per_km_to_alpha(
                    detail::num_or(pj, "loss_dB_km", default_loss, where + ".pumps"));
                const std::string dir = pj.value("direction", "backward");
                if (dir != "backward" && dir != "forward")
                    throw ParseError(where + ".pumps: direction must be 'backward' or 'forward'");
                p.backward = dir == "backward";
                sp.spp.pumps.push_back(p);
            }
        } else if (type == "external") {
            sp.spp.type = SppSpec::Type::external;
            if (!spp.contains("path") || !spp["path"].is_string())
                throw ParseError(where + ".spp: external type requires string 'path'");
            sp.spp.external_path = spp["path"].get<std::string>();
        } else {
            throw ParseError(where + ".spp: unknown type '" + type + "'");
        }
        for (const auto& lj : sj.value("lumped_losses", nlohmann::json::array())) {
            LumpedLoss ll;
            ll.z = units::km_to_m(detail::require_num(lj, "z_km", where + ".lumped_losses"));
            ll.loss_dB = detail::require_num(lj, "loss_dB", where + ".lumped_losses");
            sp.lumped.push_back(ll);
        }
        if (sj.contains("gain_dB")) {
            const auto& gj = sj["gain_dB"];
            if (gj.is_string() && gj.get<std::string>() == "transparent") {
                sp.transparent = true;
            } else if (gj.is_number()) {
                sp.transparent = false;
                sp.post_span_gain_dB.assign(sc.channels.size(), gj.get<double>());
            } else if (gj.is_array()) {
                sp.transparent = false;
                if (gj.size() != sc.channels.size())
                    throw ParseError(where + ": 'gain_dB' array length must match channel count");
                for (const auto& v : gj) sp.post_span_gain_dB.push_back(v.get<double>());
            } else {
                throw ParseError(where + ": 'gain_dB' must be \"transparent\", number or array");
            }
        }
        sc.spans.push_back(std::move(sp));
        ++span_no;
    }

    if (!j.contains("cut") || (j["cut"].is_string() && j["cut"].get<std::string>() == "all")) {
        for (const auto& c : sc.channels) sc.cut_indices.push_back(c.index);
    } else if (j["cut"].is_array()) {
        for (const auto& v : j["cut"]) sc.cut_indices.push_back(v.get<int>());
    } else {
        throw ParseError("scenario: 'cut' must be \"all\" or an array of channel indices");
    }

    sc.rho_correction.assign(sc.channels.size(), 1.0);
    if (opt.contains("rho_correction")) {
        const auto& rj = opt["rho_correction"];
        if (rj.is_number()) {
            std::fill(sc.rho_correction.begin(), sc.rho_correction.end(), rj.get<double>());
        } else if (rj.is_array() && rj.size() == sc.channels.size()) {
            for (size_t i = 0; i < sc.channels.size(); ++i)
                sc.rho_correction[i] = rj[i].get<double>();
        } else {
            throw ParseError("options: 'rho_correction' must be a number or per-channel array");
        }
    }

    sc.validate();
    return sc;
}

inline std::string emit_scenario(const LinkScenario& sc) {
    nlohmann::json j;
    j["options"] = {
        {"f_ref_THz", sc.options.f_ref / 1e12},
        {"beta2_ps2_km", units::si_to_ps2_per_km(sc.options.beta2_ref)},
        {"beta3_ps3_km", sc.options.beta3_ref * 1e39},
        {"fit_degree", sc.options.fit_degree},
        {"grid_points", sc.options.grid_points},
        {"rho_correction", sc.rho_correction},
        {"raman",
         {{"gain_slope_1_per_W_km_THz", sc.options.raman.gain_slope * 1e15},
          {"df_max_THz", sc.options.raman.df_max / 1e12},
          {"rel_tol", sc.options.raman.rel_tol},
          {"max_iterations", sc.options.raman.max_iterations}}},
    };
    j["channels"] = nlohmann::json::array();
    for (const auto& ch : sc.channels) {
        nlohmann::json cj = {
            {"index", ch.index},
            {"f_GHz", units::hz_to_ghz(ch.f_center)},
            {"R_GBaud", ch.symbol_rate / 1e9},
            {"P_dBm", units::w_to_dbm(ch.p_launch)},
            {"gamma_1_per_W_km", ch.gamma_sci * 1e3},
            {"loss_dB_km", ch.alpha * 20.0 * 1e3 / std::numbers::ln10},
        };
        if (!ch.gamma_xci_on.empty()) {
            nlohmann::json m;
            for (const auto& [k, v] : ch.gamma_xci_on) m[std::to_string(k)] = v * 1e3;
            cj["gamma_xci_1_per_W_km"] = m;
        }
        if (!ch.beta2_eff_on.empty()) {
            nlohmann::json m;
            for (const auto& [k, v] : ch.beta2_eff_on)
                m[std::to_string(k)] = units::si_to_ps2_per_km(v);
            cj["beta2_eff_ps2_km"] = m;
        }
        j["channels"].push_back(cj);
    }
    j["spans"] = nlohmann::json::array();
    for (const auto& sp : sc.spans) {
        nlohmann::json sj = {{"length_km", units::m_to_km(sp.length)}};
        nlohmann::json spp;
        switch (sp.spp.type) {
            case SppSpec::Type::flat: spp["type"] = "flat"; break;
            case SppSpec::Type::analytic: {
                spp["type"] = "analytic";
                nlohmann::json a0 = nlohmann::json::array(), a1 = nlohmann::json::array(),
                               sg = nlohmann::json::array();
                for (const auto& ap : sp.spp.analytic) {
                    a0.push_back(ap.alpha0 * 1e3);
                    a1.push_back(ap.alpha1 * 1e3);
                    sg.push_back(ap.sigma * 1e3);
                }
                spp["alpha0_1_km"] = a0;
                spp["alpha1_1_km"] = a1;
                spp["sigma_1_km"] = sg;
                break;
            }
            case SppSpec::Type::raman_ode: {
                spp["type"] = "raman_ode";
                nlohmann::json pumps = nlohmann::json::array();
                for (const auto& p : sp.spp.pumps)
                    pumps.push_back({{"f_abs_THz", p.f_abs / 1e12},
                                     {"P_mW", p.power * 1e3},
                                     {"loss_dB_km", p.alpha * 20.0 * 1e3 / std::numbers::ln10},
                                     {"direction", p.backward ? "backward" : "forward"}});
                spp["pumps"] = pumps;
                break;
            }
            case SppSpec::Type::external:
                spp["type"] = "external";
                spp["path"] = sp.spp.external_path;
                break;
        }
        sj["spp"] = spp;
        if (!sp.lumped.empty()) {
            nlohmann::json ll = nlohmann::json::array();
            for (const auto& l : sp.lumped)
                ll.push_back({{"z_km", units::m_to_km(l.z)}, {"loss_dB", l.loss_dB}});
            sj["lumped_losses"] = ll;
        }
        if (!sp.transparent) sj["gain_dB"] = sp.post_span_gain_dB;
        j["spans"].push_back(sj);
    }
    j["cut"] = sc.cut_indices;
    return j.dump(2);
}

}  // namespace nlikit
