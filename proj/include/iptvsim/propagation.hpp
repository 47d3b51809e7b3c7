#pragma once

// Path loss, noise floor and SINR for the base-station to subscriber link.
//
// All model functions are pure. Distances enter in meters through
// path_loss_db(); the pedestrian and vehicular formulas are defined over
// kilometers and convert internally.

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "iptvsim/common.hpp"

namespace iptvsim::propagation {

struct FreeSpace {
  double g_tx = 1.0;      // linear
  double g_rx = 1.0;      // linear
  double sys_loss = 1.0;  // linear, >= 1
};

struct ErcegSuburban {
  double gamma = 4.8;    // path-loss exponent
  double x_f_db = 0.0;   // frequency correction
  double x_h_db = 0.0;   // receive antenna height correction
  double shadow_db = 0.0;
};

struct PedestrianOutdoorIndoor {};

struct Vehicular {
  double bs_antenna_height_m = 15.0;
};

using PathLossModel =
    std::variant<FreeSpace, ErcegSuburban, PedestrianOutdoorIndoor, Vehicular>;

/// Reference distance of the Erceg model.
inline constexpr double kErcegReferenceM = 100.0;

inline std::string_view model_name(const PathLossModel& model) {
  return std::visit(
      [](const auto& m) -> std::string_view {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          return "free_space";
        } else if constexpr (std::is_same_v<T, ErcegSuburban>) {
          return "erceg";
        } else if constexpr (std::is_same_v<T, PedestrianOutdoorIndoor>) {
          return "pedestrian";
        } else {
          return "vehicular";
        }
      },
      model);
}

/// Throws DomainError when the model parameters break their invariants.
inline void validate(const PathLossModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          detail::require(m.g_tx > 0.0 && m.g_rx > 0.0,
                          "free space: antenna gains must be positive");
          detail::require(m.sys_loss >= 1.0,
                          "free space: system loss factor must be >= 1");
        } else if constexpr (std::is_same_v<T, ErcegSuburban>) {
          detail::require(m.gamma > 0.0, "erceg: gamma must be positive");
        } else if constexpr (std::is_same_v<T, Vehicular>) {
          detail::require(
              m.bs_antenna_height_m > 0.0 && m.bs_antenna_height_m < 250.0,
              "vehicular: base station antenna height must be in (0, 250) m");
        }
      },
      model);
}

/// Received power in watts, P_tx G_tx G_rx / ((4 pi)^2 r^2 L).
inline double free_space_rx_power(double tx_power_w, double g_tx, double g_rx,
                                  double r_m, double sys_loss) {
  detail::require(r_m > 0.0, "free space: distance must be positive");
  detail::require(g_tx > 0.0 && g_rx > 0.0,
                  "free space: antenna gains must be positive");
  detail::require(sys_loss >= 1.0, "free space: system loss must be >= 1");
  detail::require(tx_power_w >= 0.0, "free space: tx power must be >= 0");
  const double four_pi = 4.0 * kPi;
  return tx_power_w * g_tx * g_rx / (four_pi * four_pi * r_m * r_m * sys_loss);
}

/// Loss in dB implied by free_space_rx_power for a unit transmit power.
inline double free_space_path_loss_db(const FreeSpace& params, double r_m) {
  return -to_db(free_space_rx_power(1.0, params.g_tx, params.g_rx, r_m,
                                    params.sys_loss));
}

inline double erceg_path_loss(double d_m, double freq_mhz,
                              const ErcegSuburban& params) {
  detail::require(d_m >= kErcegReferenceM,
                  "erceg: distance must be >= 100 m reference distance");
  detail::require(freq_mhz > 0.0, "erceg: frequency must be positive");
  detail::require(params.gamma > 0.0, "erceg: gamma must be positive");
  const double wavelength_m = kSpeedOfLightMps / (freq_mhz * 1e6);
  const double intercept_db =
      20.0 * std::log10(4.0 * kPi * kErcegReferenceM / wavelength_m);
  return intercept_db +
         10.0 * params.gamma * std::log10(d_m / kErcegReferenceM) +
         params.x_f_db + params.x_h_db + params.shadow_db;
}

inline double pedestrian_path_loss(double r_km, double freq_mhz) {
  detail::require(r_km > 0.0, "pedestrian: distance must be positive");
  detail::require(freq_mhz > 0.0, "pedestrian: frequency must be positive");
  return 40.0 * std::log10(r_km) + 30.0 * std::log10(freq_mhz) + 49.0;
}

// The frequency term carries a positive sign (attenuation grows with f).
inline double vehicular_path_loss(double r_km, double freq_mhz,
                                  double bs_height_m) {
  detail::require(r_km > 0.0, "vehicular: distance must be positive");
  detail::require(freq_mhz > 0.0, "vehicular: frequency must be positive");
  detail::require(bs_height_m > 0.0 && bs_height_m < 250.0,
                  "vehicular: base station height must be in (0, 250) m");
  return 40.0 * (1.0 - 4e-3 * bs_height_m) * std::log10(r_km) -
         18.0 * std::log10(bs_height_m) + 21.0 * std::log10(freq_mhz) + 80.0;
}

/// Uniform loss-in-dB view over the four models; distance in meters.
inline double path_loss_db(const PathLossModel& model, double distance_m,
                           double freq_mhz) {
  return std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          return free_space_path_loss_db(m, distance_m);
        } else if constexpr (std::is_same_v<T, ErcegSuburban>) {
          return erceg_path_loss(distance_m, freq_mhz, m);
        } else if constexpr (std::is_same_v<T, PedestrianOutdoorIndoor>) {
          return pedestrian_path_loss(distance_m / 1000.0, freq_mhz);
        } else {
          return vehicular_path_loss(distance_m / 1000.0, freq_mhz,
                                     m.bs_antenna_height_m);
        }
      },
      model);
}

/// Thermal noise floor: -174 dBm/Hz + 10 log10(BW) + NF.
inline double noise_floor_dbm(double bandwidth_hz, double noise_figure_db) {
  detail::require(bandwidth_hz > 0.0, "noise floor: bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

struct LinkBudget {
  double tx_power_dbm = 20.0;
  double carrier_freq_mhz = 3500.0;
  double bandwidth_hz = 5e6;
  double noise_figure_db = 7.0;
  PathLossModel model = FreeSpace{};

  void validate() const {
    detail::require(carrier_freq_mhz > 0.0,
                    "link budget: carrier frequency must be positive");
    detail::require(bandwidth_hz > 0.0, "link budget: bandwidth must be positive");
    detail::require(noise_figure_db >= 0.0,
                    "link budget: noise figure must be >= 0");
    propagation::validate(model);
  }
};

/// Signal-to-noise ratio in dB; no interference term.
inline double compute_sinr(const LinkBudget& budget, double distance_m) {
  const double loss_db =
      path_loss_db(budget.model, distance_m, budget.carrier_freq_mhz);
  return budget.tx_power_dbm - loss_db -
         noise_floor_dbm(budget.bandwidth_hz, budget.noise_figure_db);
}

/// One-way radio propagation delay in milliseconds.
inline double radio_propagation_ms(double distance_m) {
  return distance_m / kSpeedOfLightMps * 1e3;
}

}  // namespace iptvsim::propagation
