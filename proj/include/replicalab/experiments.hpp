#pragma once

#include <exception>
#include <map>
#include <string>
#include <vector>

#include "replicalab/config.hpp"

namespace replicalab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitScale = 3;
inline constexpr int kExitIo = 4;

/// 2 for configuration, parameter, domain and distribution errors, 3 for
/// scale errors, 4 for I/O errors, 1 otherwise.
int exit_code_for(const std::exception& e);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;             ///< error text when exit_code != 0
  std::string report_json;         ///< contents written to report.json
  std::map<std::string, std::string> csv;  ///< file name -> contents
  std::vector<std::string> files;  ///< paths written
};

/// Column headers of the CSV files, byte-for-byte.
inline constexpr const char* kDivergenceCsvHeader = "m,p_hat,lo,hi";
inline constexpr const char* kScalingCsvHeader = "k,m_min,exponent";
inline constexpr const char* kNaiveCsvHeader = "k,p0,joint,bound";
inline constexpr const char* kCoordinatesCsvHeader = "coordinate,mean,invalid,validity_rate,validity_lo,validity_hi";
inline constexpr const char* kTheorem1CsvHeader = "index,n,eps,delta";
inline constexpr const char* kPgCsvHeader = "j,eps,delta,gamma,delta_hat,psi,eps_j,delta_j";

/// Runs one experiment and writes report.json plus its CSVs into
/// cfg.output_dir (created if needed). Library errors are caught and mapped
/// through exit_code_for; report.json still records the failure when the
/// directory is writable. CSVs depend only on the config, never on the
/// thread count or the clock.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Same computation without touching the filesystem.
RunOutcome compute_experiment(const ExperimentConfig& cfg);

}  // namespace replicalab
