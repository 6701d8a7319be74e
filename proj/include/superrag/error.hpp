#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace superrag {

/// Base of every exception thrown by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class no_requests : public error {
public:
  no_requests() : error("no requests recorded") {}
};

class empty_log : public error {
public:
  empty_log() : error("run log is empty") {}
};

class empty_value : public error {
public:
  empty_value() : error("cache value must be nonempty") {}
};

class duplicate_doc_id : public error {
public:
  explicit duplicate_doc_id(std::uint64_t id)
      : error("duplicate document id " + std::to_string(id)), id_(id) {}
  std::uint64_t id() const noexcept { return id_; }

private:
  std::uint64_t id_;
};

class division_by_zero : public error {
public:
  explicit division_by_zero(const std::string& what) : error("division by zero: " + what) {}
};

class domain_error : public error {
public:
  explicit domain_error(const std::string& what) : error("domain error: " + what) {}
};

class empty_dataset : public error {
public:
  empty_dataset() : error("instruct dataset is empty") {}
};

class empty_eval_set : public error {
public:
  empty_eval_set() : error("evaluation set is empty") {}
};

class empty_corpus : public error {
public:
  empty_corpus() : error("corpus is empty") {}
};

class pool_too_small : public error {
public:
  pool_too_small(std::size_t wanted, std::size_t available)
      : error("query pool too small: need " + std::to_string(wanted) + ", have " +
              std::to_string(available)) {}
};

/// Names the first violated invariant in `field()`.
class invalid_config : public error {
public:
  invalid_config(std::string field, const std::string& detail)
      : error("invalid config: " + field + (detail.empty() ? "" : " (" + detail + ")")),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Malformed line-delimited input; `line()` is 1-based.
class parse_error : public error {
public:
  parse_error(std::size_t line, const std::string& detail)
      : error("line " + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class io_error : public error {
public:
  using error::error;
};

}  // namespace superrag
