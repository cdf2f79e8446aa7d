#include "causalrisk/error.hpp"

namespace causalrisk {

const char* to_string(LearnerFailure failure) {
  switch (failure) {
    case LearnerFailure::NonzeroExit: return "nonzero exit";
    case LearnerFailure::Timeout: return "timeout";
    case LearnerFailure::Malformed: return "malformed output";
    case LearnerFailure::DimensionMismatch: return "dimension mismatch";
    case LearnerFailure::Internal: return "internal error";
  }
  return "unknown";
}

namespace {

std::string compose(LearnerFailure failure, const std::string& id, const std::string& message,
                    const std::string& captured, const std::optional<int>& fold) {
  std::string text = "learner '" + id + "' failed (" + to_string(failure) + ")";
  if (fold) text += " on fold " + std::to_string(*fold);
  text += ": " + message;
  if (!captured.empty()) text += "\nstderr:\n" + captured;
  return text;
}

}  // namespace

LearnerError::LearnerError(LearnerFailure failure, std::string learner_id,
                           const std::string& message, std::string captured_stderr,
                           std::optional<int> fold)
    : Error(compose(failure, learner_id, message, captured_stderr, fold)),
      failure_(failure),
      learner_id_(std::move(learner_id)),
      base_message_(message),
      stderr_(std::move(captured_stderr)),
      fold_(fold) {}

LearnerError LearnerError::with_fold(int fold_node_one_based) const {
  return LearnerError(failure_, learner_id_, base_message_, stderr_, fold_node_one_based);
}

}  // namespace causalrisk
