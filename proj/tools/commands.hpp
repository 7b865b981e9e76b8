#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "kamforge/torus.hpp"

namespace kamforge::cli {

double cmd_period(int n);

struct DcScanResult {
  DcPoint point;
  std::string csv;
};
/// Margin map over the action box -> dc_scan.csv.
DcScanResult cmd_dc_scan(const ExperimentConfig& cfg);

/// Excluded-frequency fractions for every configured gamma -> measure.csv.
std::vector<MeasureEstimate> cmd_measure(const ExperimentConfig& cfg);

struct PipelineResult {
  std::vector<double> I0;      // oscillator units
  std::vector<double> I_star;  // canonical units
  std::vector<StepDiagnostics> normal_form;
  std::vector<KamStepLog> kam;
  bool kam_converged = false;
  TorusEmbedding torus;
  TorusReport torus_report;
  DefectReport defect;
  std::vector<std::string> files;  // every file written, in order
};
/// Network -> normal form -> time average -> KAM -> torus, with all CSVs and torus.json.
PipelineResult cmd_pipeline(const ExperimentConfig& cfg);

struct VerifyResult {
  DefectReport defect;
  StabilityMetrics stability;
  std::vector<double> rotation;
  std::vector<double> target;
  double rotation_error = 0.0;  // max_j |rotation_j / target_j - 1|
};
/// Defect over T_check, then one orbit from the torus over the horizon ->
/// verify.csv and orbit.csv.
VerifyResult cmd_verify(const ExperimentConfig& cfg, const std::string& torus_path);

}  // namespace kamforge::cli
