#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/comm.hpp"
#include "isac/pilot.hpp"
#include "isac/sensing.hpp"
#include "isac/transforms.hpp"

namespace isac {

enum class ExperimentKind { BerPerfectCsi, BerEstimatedCsi, Nmse, DopplerError, Ccdf };

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::BerPerfectCsi: return "ber_perfect_csi";
        case ExperimentKind::BerEstimatedCsi: return "ber_estimated_csi";
        case ExperimentKind::Nmse: return "nmse";
        case ExperimentKind::DopplerError: return "doppler_error";
        case ExperimentKind::Ccdf: return "ccdf";
    }
    return "?";
}

inline ExperimentKind experiment_from_name(const std::string& s) {
    if (s == "ber_perfect_csi") return ExperimentKind::BerPerfectCsi;
    if (s == "ber_estimated_csi") return ExperimentKind::BerEstimatedCsi;
    if (s == "nmse") return ExperimentKind::Nmse;
    if (s == "doppler_error") return ExperimentKind::DopplerError;
    if (s == "ccdf") return ExperimentKind::Ccdf;
    throw std::invalid_argument("unknown experiment '" + s + "'");
}

/**
 * Config for the Monte Carlo runner. Field defaults follow the reference
 * system setup: 6 GHz carrier, 60 kHz subcarrier spacing, 64 subcarriers,
 * 16-symbol communication frames (sensing frames up to 512 symbols),
 * pilot-to-data power ratio 0.2, EVA communication channel at 30 km/h and
 * sensing targets up to 500 km/h.
 *
 * SNR is referenced to the average data-signal power (the pilot overlay is
 * excluded from the reference).
 */
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::BerPerfectCsi;
    int m = 64;
    int n = 16;
    int cp_length = 16;  // covers the largest EVA tap (10 at 3.84 MHz)
    std::vector<int> sensing_n_list = {64, 128, 256, 512};
    int sensing_cp_length = 8;
    double subcarrier_spacing_hz = 60e3;
    double carrier_hz = 6e9;
    double power_ratio = 0.2;
    std::vector<double> snr_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30};
    long trials = 1000;
    std::uint64_t master_seed = 1;
    CsiMode csi_mode = CsiMode::Perfect;
    int target_count = 3;
    double comm_velocity_kmh = 30.0;
    double sensing_velocity_kmh = 500.0;
    PowerDelayProfile pdp = eva_pdp();
    double gamma_scale = 8.0;
    int refine_width = 3;
    int rs_freq_stride = 4;
    std::vector<int> ccdf_sizes = {15, 63, 255};

    FrameGeometry comm_geometry() const {
        return {m, n, subcarrier_spacing_hz, cp_length};
    }
    FrameGeometry sensing_geometry(int n_doppler) const {
        return {m, n_doppler, subcarrier_spacing_hz, sensing_cp_length};
    }
};

// ---------------------------------------------------------------------------
// Config file parsing: flat "key = value" lines, # comments, comma lists,
// SNR grids as "start:stop:step".
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_number_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        size_t pos = 0;
        const double d = std::stod(item, &pos);
        if (pos != item.size())
            throw std::invalid_argument("config: bad number '" + item + "' for " + key);
        out.push_back(d);
    }
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

}  // namespace detail

/// "a:b:step" inclusive grid, or a comma-separated list.
inline std::vector<double> parse_snr_spec(const std::string& spec) {
    if (spec.find(':') == std::string::npos)
        return detail::parse_number_list(spec, "snr_db");
    double a = 0, b = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0)
        throw std::invalid_argument("bad SNR spec '" + spec + "' (want a:b:step)");
    std::vector<double> out;
    for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
    return out;
}

inline CsiMode csi_mode_from_name(const std::string& s) {
    if (s == "perfect") return CsiMode::Perfect;
    if (s == "equivalent_rs") return CsiMode::EquivalentRs;
    if (s == "pilot_ignorant_rs") return CsiMode::PilotIgnorantRs;
    throw std::invalid_argument("unknown csi_mode '" + s + "'");
}

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    using detail::parse_number_list;
    const auto to_int_list = [&](const std::string& v) {
        std::vector<int> out;
        for (double d : parse_number_list(v, key)) out.push_back(static_cast<int>(d));
        return out;
    };
    if (key == "experiment") cfg.experiment = experiment_from_name(value);
    else if (key == "m") cfg.m = std::stoi(value);
    else if (key == "n") cfg.n = std::stoi(value);
    else if (key == "cp_length") cfg.cp_length = std::stoi(value);
    else if (key == "sensing_n_list") cfg.sensing_n_list = to_int_list(value);
    else if (key == "sensing_cp_length") cfg.sensing_cp_length = std::stoi(value);
    else if (key == "subcarrier_spacing_hz") cfg.subcarrier_spacing_hz = std::stod(value);
    else if (key == "carrier_hz") cfg.carrier_hz = std::stod(value);
    else if (key == "power_ratio") cfg.power_ratio = std::stod(value);
    else if (key == "snr_db") cfg.snr_db = parse_snr_spec(value);
    else if (key == "trials") cfg.trials = std::stol(value);
    else if (key == "master_seed") cfg.master_seed = std::stoull(value);
    else if (key == "csi_mode") cfg.csi_mode = csi_mode_from_name(value);
    else if (key == "target_count") cfg.target_count = std::stoi(value);
    else if (key == "comm_velocity_kmh") cfg.comm_velocity_kmh = std::stod(value);
    else if (key == "sensing_velocity_kmh") cfg.sensing_velocity_kmh = std::stod(value);
    else if (key == "pdp_delays_ns") cfg.pdp.delays_ns = parse_number_list(value, key);
    else if (key == "pdp_powers_db") cfg.pdp.powers_db = parse_number_list(value, key);
    else if (key == "gamma_scale") cfg.gamma_scale = std::stod(value);
    else if (key == "refine_width") cfg.refine_width = std::stoi(value);
    else if (key == "rs_freq_stride") cfg.rs_freq_stride = std::stoi(value);
    else if (key == "ccdf_sizes") cfg.ccdf_sizes = to_int_list(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        try {
            apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                               detail::trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " +
                                        e.what());
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse_config(in);
}

/// Fails fast with a descriptive message before any simulation runs.
inline void validate_config(const ExperimentConfig& cfg) {
    const auto geom = cfg.comm_geometry();           // throws on bad M/N/CP
    for (int n : cfg.sensing_n_list) cfg.sensing_geometry(n);
    if (cfg.trials <= 0) throw std::invalid_argument("config: trials must be positive");
    if (cfg.power_ratio < 0) throw std::invalid_argument("config: power_ratio must be >= 0");
    if (cfg.snr_db.empty()) throw std::invalid_argument("config: empty SNR grid");
    if (cfg.target_count < 1) throw std::invalid_argument("config: target_count must be >= 1");
    if (cfg.target_count > cfg.sensing_cp_length)
        throw std::invalid_argument("config: more sensing targets than distinct delays");
    if (cfg.pdp.delays_ns.size() != cfg.pdp.powers_db.size())
        throw std::invalid_argument("config: pdp_delays_ns and pdp_powers_db lengths differ");
    if (cfg.refine_width < 1 || cfg.refine_width % 2 == 0)
        throw std::invalid_argument("config: refine_width must be odd");
    for (double d : cfg.pdp.delays_ns) {
        const int tap = static_cast<int>(std::round(d * 1e-9 * geom.sample_rate_hz()));
        if (tap >= cfg.cp_length)
            throw std::invalid_argument(
                "config: PDP delay " + std::to_string(d) + " ns maps to tap " +
                std::to_string(tap) + " >= cp_length " + std::to_string(cfg.cp_length));
    }
}

/// Canonical serialization; also the input of the config hash.
inline std::string config_to_string(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "experiment=" << experiment_name(cfg.experiment) << "\nm=" << cfg.m
       << "\nn=" << cfg.n << "\ncp_length=" << cfg.cp_length << "\nsensing_n_list=";
    for (size_t i = 0; i < cfg.sensing_n_list.size(); ++i)
        os << (i ? "," : "") << cfg.sensing_n_list[i];
    os << "\nsensing_cp_length=" << cfg.sensing_cp_length;
    char buf[64];
    const auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "\nsubcarrier_spacing_hz=" << num(cfg.subcarrier_spacing_hz)
       << "\ncarrier_hz=" << num(cfg.carrier_hz)
       << "\npower_ratio=" << num(cfg.power_ratio) << "\nsnr_db=";
    for (size_t i = 0; i < cfg.snr_db.size(); ++i) os << (i ? "," : "") << num(cfg.snr_db[i]);
    os << "\ntrials=" << cfg.trials << "\nmaster_seed=" << cfg.master_seed << "\ncsi_mode="
       << (cfg.csi_mode == CsiMode::Perfect
               ? "perfect"
               : cfg.csi_mode == CsiMode::EquivalentRs ? "equivalent_rs" : "pilot_ignorant_rs")
       << "\ntarget_count=" << cfg.target_count
       << "\ncomm_velocity_kmh=" << num(cfg.comm_velocity_kmh)
       << "\nsensing_velocity_kmh=" << num(cfg.sensing_velocity_kmh) << "\npdp_delays_ns=";
    for (size_t i = 0; i < cfg.pdp.delays_ns.size(); ++i)
        os << (i ? "," : "") << num(cfg.pdp.delays_ns[i]);
    os << "\npdp_powers_db=";
    for (size_t i = 0; i < cfg.pdp.powers_db.size(); ++i)
        os << (i ? "," : "") << num(cfg.pdp.powers_db[i]);
    os << "\ngamma_scale=" << num(cfg.gamma_scale) << "\nrefine_width=" << cfg.refine_width
       << "\nrs_freq_stride=" << cfg.rs_freq_stride << "\nccdf_sizes=";
    for (size_t i = 0; i < cfg.ccdf_sizes.size(); ++i)
        os << (i ? "," : "") << cfg.ccdf_sizes[i];
    os << "\n";
    return os.str();
}

/// FNV-1a 64-bit over the canonical serialization, as 16 hex chars.
inline std::string config_hash(const ExperimentConfig& cfg) {
    const std::string s = config_to_string(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ResultRow {
    std::string experiment;
    double snr_db = 0.0;
    std::string metric;
    double value = 0.0;
    double stderr_value = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "experiment,snr_db,metric,value,stderr,trials,seed,config_hash\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.10g,%s,%.10g,%.10g,%ld,%llu,%s\n",
                      r.experiment.c_str(), r.snr_db, r.metric.c_str(), r.value,
                      r.stderr_value, r.trials, static_cast<unsigned long long>(r.seed),
                      r.config_hash.c_str());
        os << buf;
    }
}

/// Mean and standard error of a sample.
struct MeanStderr {
    double mean = 0.0;
    double stderr_value = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

/// Per-trial seed: independent substream for every (SNR point, trial).
inline std::uint64_t trial_seed(std::uint64_t master, double snr_db, long trial) {
    const auto snr_key = static_cast<std::uint64_t>(std::llround(snr_db * 1000.0) + (1 << 20));
    return derive_seed(derive_seed(master, snr_key), static_cast<std::uint64_t>(trial));
}

/// Relative Doppler estimation error (1/p) * sum |(est_i - true_i) / true_i|.
/// Zero-Doppler truths cannot be scored by a relative metric and are
/// excluded with a warning.
inline double doppler_error_rate(const std::vector<double>& estimates,
                                 const std::vector<double>& truths) {
    if (estimates.size() != truths.size())
        throw std::invalid_argument("doppler_error_rate: length mismatch");
    if (truths.empty()) throw std::invalid_argument("doppler_error_rate: empty input");
    double acc = 0.0;
    int counted = 0;
    for (size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] == 0.0) {
            std::cerr << "doppler_error_rate: skipping target " << i
                      << " with zero Doppler (relative error undefined)\n";
            continue;
        }
        acc += std::abs((estimates[i] - truths[i]) / truths[i]);
        ++counted;
    }
    return counted ? acc / counted : 0.0;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace detail {

/// Reusable per-geometry communication scenario state.
struct CommScenario {
    FrameGeometry geom;
    Pilot2D pilot;
    Grid pilot_tf;         ///< unit-power TF pilot
    RsMask rs;
    std::vector<std::pair<int, int>> data_cells;  ///< (row, col) of non-RS cells

    explicit CommScenario(const ExperimentConfig& cfg)
        : geom(cfg.comm_geometry()),
          pilot(default_pilot(geom)),
          pilot_tf(isfft(pilot.matrix, geom)),
          rs(build_rs_mask(geom, cfg.rs_freq_stride, derive_seed(cfg.master_seed, 0xB5))) {
        for (int c = 0; c < geom.n(); ++c)
            for (int r = 0; r < geom.m(); ++r)
                if (!rs.mask(r, c)) data_cells.emplace_back(r, c);
    }

    Grid scaled_pilot(double rho) const {
        return {Domain::TimeFrequency, std::sqrt(rho) * pilot_tf.samples};
    }
};

struct CommFrameResult {
    double frame_ber = 0.0;
    double nmse_lin = 0.0;
};

/**
 * One communication frame end to end: random payload + RS grid, pilot
 * superposition at ratio rho, EVA channel, AWGN, then channel estimation
 * (or perfect CSI), pilot cancellation, MMSE equalization and hard 16QAM
 * detection.
 */
inline CommFrameResult run_comm_frame(const CommScenario& sc, const ExperimentConfig& cfg,
                                      double rho, double snr_db, CsiMode mode,
                                      std::uint64_t trial_seed) {
    const FrameGeometry& geom = sc.geom;
    Rng data_rng(derive_seed(trial_seed, 3));
    std::vector<std::uint8_t> bits(sc.data_cells.size() * 4);
    for (auto& b : bits) b = static_cast<std::uint8_t>(data_rng.next_u64() & 1u);

    Grid d = Grid::zeros(Domain::TimeFrequency, geom);
    const Eigen::VectorXcd syms = qam16::modulate(bits);
    for (size_t i = 0; i < sc.data_cells.size(); ++i)
        d.samples(sc.data_cells[i].first, sc.data_cells[i].second) =
            syms[static_cast<Eigen::Index>(i)];
    for (int s : sc.rs.rs_symbols)
        for (int r = 0; r < geom.m(); r += sc.rs.freq_stride)
            d.samples(r, s) = sc.rs.values(r, s);

    const Grid scaled_pilot = sc.scaled_pilot(rho);
    const Grid x_tf = superimpose(sc.pilot_tf, d, rho);
    const TimeSignal x = ofdm_modulate(x_tf, geom);

    const ChannelRealization ch = sample_eva_channel(
        derive_seed(trial_seed, 1), geom,
        doppler_hz_from_velocity(cfg.comm_velocity_kmh, cfg.carrier_hz));
    TimeSignal y = apply_channel(x, ch);

    const double sigma2 = noise_variance(snr_db, 1.0);  // data-power reference
    Rng noise_rng(derive_seed(trial_seed, 2));
    y = add_awgn(y, sigma2, noise_rng);

    const Grid y_tf = ofdm_demodulate(y, geom);
    const Grid h_true = one_tap_tf_channel(ch, geom);

    ChannelEstimate est{h_true, CsiMode::Perfect};
    if (mode != CsiMode::Perfect) est = estimate_channel(y_tf, sc.rs, d, scaled_pilot, mode);

    const Grid d_hat = cancel_and_equalize(y_tf, est, scaled_pilot, sigma2);
    Eigen::VectorXcd rx_syms(static_cast<Eigen::Index>(sc.data_cells.size()));
    for (size_t i = 0; i < sc.data_cells.size(); ++i)
        rx_syms[static_cast<Eigen::Index>(i)] =
            d_hat.samples(sc.data_cells[i].first, sc.data_cells[i].second);

    CommFrameResult out;
    out.frame_ber = ber(bits, qam16::demodulate(rx_syms));
    out.nmse_lin = nmse_linear(est.h_tf, h_true);
    return out;
}

}  // namespace detail

/**
 * BER sweep with two arms sharing common random numbers per trial: the
 * pilot-underlaid system at the configured power ratio vs. plain OFDM
 * (power ratio 0). kind selects perfect or estimated CSI.
 */
inline std::vector<ResultRow> run_ber_experiment(const ExperimentConfig& cfg,
                                                 ExperimentKind kind) {
    const detail::CommScenario sc(cfg);
    const std::string name = experiment_name(kind);
    const std::string hash = config_hash(cfg);
    const CsiMode mode =
        kind == ExperimentKind::BerPerfectCsi ? CsiMode::Perfect : CsiMode::EquivalentRs;

    std::vector<ResultRow> rows;
    for (double snr : cfg.snr_db) {
        std::vector<double> ber_spu, ber_ofdm;
        ber_spu.reserve(cfg.trials);
        ber_ofdm.reserve(cfg.trials);
        for (long t = 0; t < cfg.trials; ++t) {
            const std::uint64_t ts = trial_seed(cfg.master_seed, snr, t);
            ber_spu.push_back(
                detail::run_comm_frame(sc, cfg, cfg.power_ratio, snr, mode, ts).frame_ber);
            ber_ofdm.push_back(detail::run_comm_frame(sc, cfg, 0.0, snr, mode, ts).frame_ber);
        }
        const auto a = mean_stderr(ber_spu);
        const auto b = mean_stderr(ber_ofdm);
        rows.push_back({name, snr, "ber_spu_ofdm", a.mean, a.stderr_value, cfg.trials,
                        cfg.master_seed, hash});
        rows.push_back({name, snr, "ber_ofdm", b.mean, b.stderr_value, cfg.trials,
                        cfg.master_seed, hash});
    }
    return rows;
}

/**
 * Channel-estimation NMSE sweep: equivalent-RS estimation under the pilot,
 * plain OFDM estimation without the pilot, and the pilot-ignorant baseline
 * that divides by the data RS alone.
 */
inline std::vector<ResultRow> run_nmse_experiment(const ExperimentConfig& cfg) {
    const detail::CommScenario sc(cfg);
    const std::string name = experiment_name(ExperimentKind::Nmse);
    const std::string hash = config_hash(cfg);

    std::vector<ResultRow> rows;
    for (double snr : cfg.snr_db) {
        std::vector<double> nm_eq, nm_plain, nm_ign;
        for (long t = 0; t < cfg.trials; ++t) {
            const std::uint64_t ts = trial_seed(cfg.master_seed, snr, t);
            nm_eq.push_back(detail::run_comm_frame(sc, cfg, cfg.power_ratio, snr,
                                                   CsiMode::EquivalentRs, ts)
                                .nmse_lin);
            nm_plain.push_back(
                detail::run_comm_frame(sc, cfg, 0.0, snr, CsiMode::EquivalentRs, ts).nmse_lin);
            nm_ign.push_back(detail::run_comm_frame(sc, cfg, cfg.power_ratio, snr,
                                                    CsiMode::PilotIgnorantRs, ts)
                                 .nmse_lin);
        }
        // value: mean linear NMSE in dB; stderr: delta-method dB-scale error
        const auto mk = [&](const char* metric, const std::vector<double>& v) {
            const auto ms = mean_stderr(v);
            const double db = 10.0 * std::log10(ms.mean);
            const double db_se =
                ms.mean > 0 ? 10.0 / std::log(10.0) * ms.stderr_value / ms.mean : 0.0;
            rows.push_back({name, snr, metric, db, db_se, cfg.trials, cfg.master_seed, hash});
        };
        mk("nmse_db_equivalent_rs", nm_eq);
        mk("nmse_db_plain_ofdm", nm_plain);
        mk("nmse_db_pilot_ignorant", nm_ign);
    }
    return rows;
}

namespace detail {

/// One sensing frame: targets + data-filled grid + AWGN, returns per-target
/// unrefined/refined Doppler estimates in Hz via the correlation map.
struct SensingTrialResult {
    std::vector<double> true_hz;
    std::vector<double> unrefined_hz;
    std::vector<double> refined_hz;
};

inline SensingTrialResult run_sensing_trial(const FrameGeometry& geom, const Pilot2D& pilot,
                                            const ExperimentConfig& cfg, double snr_db,
                                            std::uint64_t trial_seed) {
    const double fd_max = doppler_hz_from_velocity(cfg.sensing_velocity_kmh, cfg.carrier_hz);
    const ChannelRealization targets =
        sample_sensing_targets(derive_seed(trial_seed, 4), geom, cfg.target_count, fd_max);

    Rng data_rng(derive_seed(trial_seed, 3));
    static const double kQamLevels[4] = {-3.0, -1.0, 1.0, 3.0};
    Grid d = Grid::zeros(Domain::TimeFrequency, geom);
    for (int c = 0; c < geom.n(); ++c)
        for (int r = 0; r < geom.m(); ++r)
            d.samples(r, c) = cd(kQamLevels[data_rng.uniform_int(4)],
                                 kQamLevels[data_rng.uniform_int(4)]) / std::sqrt(10.0);

    const Grid pilot_tf = isfft(pilot.matrix, geom);
    const TimeSignal x = ofdm_modulate(superimpose(pilot_tf, d, cfg.power_ratio), geom);
    TimeSignal y = apply_channel(x, targets);
    Rng noise_rng(derive_seed(trial_seed, 2));
    y = add_awgn(y, noise_variance(snr_db, 1.0), noise_rng);
    const Grid r_dd = sfft(ofdm_demodulate(y, geom), geom);

    const int k_cap = static_cast<int>(std::ceil(geom.doppler_tap_from_hz(fd_max))) + 2;
    const int k_max = std::min(geom.n() - 1, k_cap);
    const Eigen::MatrixXd map =
        correlation_map(r_dd, pilot, geom, geom.cp_length - 1, true);

    SensingTrialResult out;
    for (const auto& tg : targets.paths) {
        const int l = static_cast<int>(tg.delay_taps);
        int k_hat = 0;
        for (int k = 1; k <= k_max; ++k)
            if (map(l, k) > map(l, k_hat)) k_hat = k;
        out.true_hz.push_back(geom.doppler_hz_from_tap(tg.doppler_taps));
        out.unrefined_hz.push_back(geom.doppler_hz_from_tap(k_hat));
        out.refined_hz.push_back(geom.doppler_hz_from_tap(
            refine_doppler(map, k_hat, l, cfg.refine_width)));
    }
    return out;
}

}  // namespace detail

/**
 * Doppler error-rate sweep over the sensing frame sizes. Per trial the
 * targets' physical Doppler shifts are drawn once (common across N), so the
 * size comparison is paired.
 */
inline std::vector<ResultRow> run_doppler_error_experiment(const ExperimentConfig& cfg) {
    const std::string name = experiment_name(ExperimentKind::DopplerError);
    const std::string hash = config_hash(cfg);

    std::vector<ResultRow> rows;
    for (int n_sym : cfg.sensing_n_list) {
        const FrameGeometry geom = cfg.sensing_geometry(n_sym);
        const Pilot2D pilot = default_pilot(geom);
        for (double snr : cfg.snr_db) {
            std::vector<double> unref, ref;
            for (long t = 0; t < cfg.trials; ++t) {
                const std::uint64_t ts = trial_seed(cfg.master_seed, snr, t);
                const auto res = detail::run_sensing_trial(geom, pilot, cfg, snr, ts);
                unref.push_back(doppler_error_rate(res.unrefined_hz, res.true_hz));
                ref.push_back(doppler_error_rate(res.refined_hz, res.true_hz));
            }
            const auto u = mean_stderr(unref);
            const auto r = mean_stderr(ref);
            rows.push_back({name, snr, "doppler_error_unrefined_n" + std::to_string(n_sym),
                            u.mean, u.stderr_value, cfg.trials, cfg.master_seed, hash});
            rows.push_back({name, snr, "doppler_error_refined_n" + std::to_string(n_sym),
                            r.mean, r.stderr_value, cfg.trials, cfg.master_seed, hash});
        }
    }
    return rows;
}

/// Cross-correlation CCDF quantiles per pilot size and interference source.
inline std::vector<ResultRow> run_ccdf_experiment(const ExperimentConfig& cfg) {
    const std::string name = experiment_name(ExperimentKind::Ccdf);
    const std::string hash = config_hash(cfg);
    std::vector<ResultRow> rows;
    for (int size : cfg.ccdf_sizes) {
        for (CcdfSource src : {CcdfSource::QamData, CcdfSource::Noise}) {
            const char* srcname = src == CcdfSource::QamData ? "qam" : "noise";
            const auto table = correlation_ccdf(
                size, src, static_cast<int>(cfg.trials),
                derive_seed(cfg.master_seed, 0xCCDF0 + static_cast<std::uint64_t>(size) * 2 +
                                                 (src == CcdfSource::Noise)));
            for (double q : {0.5, 0.9, 0.99}) {
                char metric[64];
                std::snprintf(metric, sizeof metric, "q%02d_abs_corr_%s_%d",
                              static_cast<int>(q * 100), srcname, size);
                rows.push_back({name, 0.0, metric, ccdf_quantile(table, q), 0.0, cfg.trials,
                                cfg.master_seed, hash});
            }
        }
    }
    return rows;
}

/// Dispatch on the configured experiment; output is a pure function of the
/// config (identical config + seed -> identical rows).
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    switch (cfg.experiment) {
        case ExperimentKind::BerPerfectCsi:
            return run_ber_experiment(cfg, ExperimentKind::BerPerfectCsi);
        case ExperimentKind::BerEstimatedCsi:
            return run_ber_experiment(cfg, ExperimentKind::BerEstimatedCsi);
        case ExperimentKind::Nmse: return run_nmse_experiment(cfg);
        case ExperimentKind::DopplerError: return run_doppler_error_experiment(cfg);
        case ExperimentKind::Ccdf: return run_ccdf_experiment(cfg);
    }
    throw std::logic_error("run_experiment: unhandled experiment kind");
}

/// One sensing frame's correlation map for the `map` CLI subcommand.
inline Eigen::MatrixXd one_shot_correlation_map(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const FrameGeometry geom = cfg.sensing_geometry(cfg.sensing_n_list.front());
    const Pilot2D pilot = default_pilot(geom);
    const double fd_max = doppler_hz_from_velocity(cfg.sensing_velocity_kmh, cfg.carrier_hz);
    const std::uint64_t ts = derive_seed(cfg.master_seed, 0);
    const ChannelRealization targets =
        sample_sensing_targets(derive_seed(ts, 4), geom, cfg.target_count, fd_max);

    Rng data_rng(derive_seed(ts, 3));
    static const double kQamLevels[4] = {-3.0, -1.0, 1.0, 3.0};
    Grid d = Grid::zeros(Domain::TimeFrequency, geom);
    for (int c = 0; c < geom.n(); ++c)
        for (int r = 0; r < geom.m(); ++r)
            d.samples(r, c) = cd(kQamLevels[data_rng.uniform_int(4)],
                                 kQamLevels[data_rng.uniform_int(4)]) / std::sqrt(10.0);
    const TimeSignal x =
        ofdm_modulate(superimpose(isfft(pilot.matrix, geom), d, cfg.power_ratio), geom);
    TimeSignal y = apply_channel(x, targets);
    Rng noise_rng(derive_seed(ts, 2));
    y = add_awgn(y, noise_variance(cfg.snr_db.front(), 1.0), noise_rng);
    const Grid r_dd = sfft(ofdm_demodulate(y, geom), geom);
    return correlation_map(r_dd, pilot, geom, geom.cp_length - 1, true);
}

}  // namespace isac
