#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehs/cqed.hpp"
#include "ehs/types.hpp"
#include "json.hpp"

namespace ehs::cli {

typedef nlohmann::ordered_json Json;

// Bad or missing configuration; the message carries file:line:column and the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScanSpec {
  std::string name;
  std::vector<std::string> axes;  // among q1, q2, q3, q5
  Vector5d base = Vector5d::Zero();
  double lo = -2.0, hi = 2.0;
  int n = 81;
};

struct SpectrumConfig {
  double kappa = 1.0;
  double locus_gap = 0.5;  // rows with gap below this count as the zero-gap locus
  std::vector<ScanSpec> scans;
  double rotation_R_outside = 2.0;
  double rotation_R_inside = 0.5;
  int rotation_samples = 361;
  int random_count = 0;
  double random_R_lo = 0.1, random_R_hi = 4.0;
};

struct ChernConfig {
  double kappa = 1.0;
  std::vector<double> R{0.25, 0.5, 2.0, 4.0};
  std::array<int, 4> grid{24, 24, 24, 24};
  double fd_step = 1e-4;
  int max_refinements = 0;
  double defect_target = 0.02;
  double fail_defect = 0.05;
};

struct WilsonConfig {
  double kappa = 1.0;
  double slice_R = 2.0;
  double theta2_lo = 0.0, theta2_hi = pi / 2;
  int theta2_points = 51;
  std::vector<double> min_R{0.5, 1.5, 2.0, 4.0};
  int min_theta2_points = 101;
  double moebius_R = 1.0;
  std::vector<double> moebius_delta{0.5, 1.0, 1.5, 2.5, 3.0};
  int moebius_steps = 512;
  bool transition = true;
  double transition_lo = 1.5, transition_hi = 2.5, transition_tol = 1e-3;
  double transport_R = 2.0;
  std::vector<double> transport_theta2{0.0, pi / 4};
  int transport_initial = 0;
  int transport_samples = 401;
};

struct FitPoint {
  double R_over_kappa = 2.0;
  Angles angles{1.1, 0.5, 0.8, 2.4};
};

struct CqedRunConfig {
  CqedConfig model;
  std::string trajectory_model = "effective";  // effective | full
  std::string initial = "fg0";                 // fg0 | 1+ | gf0 | 1-
  double t_max = 0.0;                          // 0: one Rabi period of the target model
  int trajectory_samples = 41;
  bool lindblad = true;
  std::vector<FitPoint> fit_points{FitPoint{}, FitPoint{0.5, {2.0, 1.2, 0.3, 4.0}}};
  int fit_samples = 10;
  std::vector<double> protocol_R{0.5, 2.0};
  std::array<int, 4> protocol_grid{12, 12, 8, 8};
  double protocol_fd_step = 1e-3;
  int protocol_samples = 10;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  SpectrumConfig spectrum;
  ChernConfig chern;
  WilsonConfig wilson;
  CqedRunConfig cqed;
};

// Parses the YAML text; only the block of the selected command is read and checked.
RunConfig parse_config(const std::string& text, const std::string& command, const std::string& source = "<config>");
RunConfig load_config(const std::string& path, const std::string& command);

// Fully resolved configuration of the selected command (defaults filled in).
Json resolved_json(const RunConfig& cfg);

}  // namespace ehs::cli
