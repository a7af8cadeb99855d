#pragma once

#include <stdexcept>
#include <string>

namespace aepn {

enum class Err {
  DuplicateId,
  UnknownPlaceInArc,
  SchemaMismatch,
  UnknownRegistryRef,
  MissingTransitions,
  UnknownPlace,
  FlagLengthMismatch,
  StaleBinding,
  InvalidBehaviorOutput,
  IndexOutOfRange,
  EpisodeFinished,
  NoActions,
  BudgetExceeded,
  UnknownProblem,
  UnknownPolicy,
  UnknownStage,
  EmptyEvaluation,
  ModelSchemaMismatch,
  NonFiniteLoss,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}
  Err code() const { return code_; }

  // True for errors caused by bad user input (CLI exit code 2).
  bool is_usage() const {
    switch (code_) {
      case Err::UnknownProblem:
      case Err::UnknownPolicy:
      case Err::UnknownStage:
      case Err::EmptyEvaluation:
        return true;
      default:
        return false;
    }
  }

 private:
  Err code_;
};

}  // namespace aepn
