#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace causalrisk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or flag combinations supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input files, inconsistent datasets, violated preconditions on data.
class DataError : public Error {
 public:
  using Error::Error;
};

enum class LearnerFailure { NonzeroExit, Timeout, Malformed, DimensionMismatch, Internal };

const char* to_string(LearnerFailure failure);

class LearnerError : public Error {
 public:
  LearnerError(LearnerFailure failure, std::string learner_id, const std::string& message,
               std::string captured_stderr = {}, std::optional<int> fold = std::nullopt);

  LearnerFailure failure() const noexcept { return failure_; }
  const std::string& learner_id() const noexcept { return learner_id_; }
  const std::string& captured_stderr() const noexcept { return stderr_; }
  // 1-based intervened node of the cross-validation fold, when the failure happened inside one.
  const std::optional<int>& fold() const noexcept { return fold_; }

  LearnerError with_fold(int fold_node_one_based) const;

 private:
  LearnerFailure failure_;
  std::string learner_id_;
  std::string base_message_;
  std::string stderr_;
  std::optional<int> fold_;
};

}  // namespace causalrisk
