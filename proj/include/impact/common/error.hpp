#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace impact {

/// Base class for every domain error. kind() is a stable, machine-readable
/// name that the CLI prints and maps to an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error("PreconditionError", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class MissingInput : public Error {
 public:
  explicit MissingInput(const std::string& message) : Error("MissingInput", message) {}
};

class CorruptRecord : public Error {
 public:
  CorruptRecord(std::size_t line_number, const std::string& detail)
      : Error("CorruptRecord", "corrupt record at line " + std::to_string(line_number) + ": " + detail),
        line_number_(line_number) {}

  std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::size_t line_number_;
};

// --- llm gateway ------------------------------------------------------------

class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, bool transient = false)
      : Error("ProviderError", message), transient_(transient) {}

  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class AuthError : public Error {
 public:
  explicit AuthError(const std::string& message) : Error("AuthError", message) {}
};

class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& message) : Error("BudgetExceeded", message) {}
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(const std::string& message, std::string raw_text)
      : Error("SchemaViolation", message), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

// --- corpus -----------------------------------------------------------------

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message) : Error("NotFound", message) {}
};

class ApiError : public Error {
 public:
  ApiError(const std::string& message, bool transient = false)
      : Error("ApiError", message), transient_(transient) {}

  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

// --- intent engine / evaluator ----------------------------------------------

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw_text)
      : Error("ParseError", message), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

class JudgeParseError : public Error {
 public:
  JudgeParseError(const std::string& message, std::string raw_text)
      : Error("JudgeParseError", message), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

class IdMismatch : public Error {
 public:
  explicit IdMismatch(const std::string& message) : Error("IdMismatch", message) {}
};

class UnknownLabel : public Error {
 public:
  UnknownLabel(const std::string& scheme, const std::string& label)
      : Error("UnknownLabel", "unknown label '" + label + "' for scheme " + scheme) {}
};

class EmptySplit : public Error {
 public:
  explicit EmptySplit(const std::string& message) : Error("EmptySplit", message) {}
};

class NoImpactCitations : public Error {
 public:
  explicit NoImpactCitations(const std::string& paper_id)
      : Error("NoImpactCitations", "paper " + paper_id + " has no impact-revealing citations") {}
};

class MissingCell : public Error {
 public:
  MissingCell(const std::string& paper_id, const std::string& variant)
      : Error("MissingCell", "no evaluation for paper " + paper_id + " / variant " + variant) {}
};

// --- dataset builder --------------------------------------------------------

class PatternCompileError : public Error {
 public:
  PatternCompileError(int pattern_id, const std::string& detail)
      : Error("PatternCompileError", "pattern " + std::to_string(pattern_id) + ": " + detail),
        pattern_id_(pattern_id) {}

  int pattern_id() const noexcept { return pattern_id_; }

 private:
  int pattern_id_;
};

class InsufficientMatches : public Error {
 public:
  InsufficientMatches(const std::string& polarity, std::size_t have, std::size_t need)
      : Error("InsufficientMatches", "not enough " + polarity + " contexts: have " + std::to_string(have) +
                                         ", need " + std::to_string(need)),
        polarity_(polarity),
        have_(have),
        need_(need) {}

  const std::string& polarity() const noexcept { return polarity_; }
  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

 private:
  std::string polarity_;
  std::size_t have_;
  std::size_t need_;
};

// --- summarizer / study -----------------------------------------------------

class EmptyEvidence : public Error {
 public:
  explicit EmptyEvidence(const std::string& message) : Error("EmptyEvidence", message) {}
};

class MissingSummary : public Error {
 public:
  MissingSummary(const std::string& paper_id, const std::string& variant)
      : Error("MissingSummary", "no summary for paper " + paper_id + " / variant " + variant) {}
};

class UnknownTask : public Error {
 public:
  explicit UnknownTask(const std::string& task_id) : Error("UnknownTask", "unknown task " + task_id) {}
};

class InvalidLikert : public Error {
 public:
  explicit InvalidLikert(long value)
      : Error("InvalidLikert", "likert value " + std::to_string(value) + " outside 1..5") {}
};

class NoVotes : public Error {
 public:
  NoVotes() : Error("NoVotes", "study has no votes") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("LengthMismatch", "score vectors differ in length: " + std::to_string(a) + " vs " +
                                    std::to_string(b)) {}
};

}  // namespace impact
