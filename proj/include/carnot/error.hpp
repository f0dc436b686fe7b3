#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace carnot {

/// Coarse error class, used by the command line front end to pick an exit code.
enum class error_kind { parse, validation, numeric };

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

class validation_error : public error {
 public:
  explicit validation_error(const std::string& what) : error(error_kind::validation, what) {}
};

class numeric_error : public error {
 public:
  explicit numeric_error(const std::string& what) : error(error_kind::numeric, what) {}
};

class parse_error : public error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : error(error_kind::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Lie algebra input and structure.

class index_out_of_range : public validation_error {
 public:
  using validation_error::validation_error;
};

class invalid_bracket_table : public validation_error {
 public:
  using validation_error::validation_error;
};

class jacobi_violation : public validation_error {
 public:
  jacobi_violation(std::size_t a, std::size_t b, std::size_t c, std::string residual)
      : validation_error("Jacobi identity fails on basis triple (" + std::to_string(a + 1) + ", " +
                         std::to_string(b + 1) + ", " + std::to_string(c + 1) + "), residual " + residual),
        a_(a), b_(b), c_(c), residual_(std::move(residual)) {}
  std::size_t a() const noexcept { return a_; }
  std::size_t b() const noexcept { return b_; }
  std::size_t c() const noexcept { return c_; }
  const std::string& residual() const noexcept { return residual_; }

 private:
  std::size_t a_, b_, c_;
  std::string residual_;
};

class not_nilpotent : public validation_error {
 public:
  using validation_error::validation_error;
};

class step_cap_exceeded : public validation_error {
 public:
  using validation_error::validation_error;
};

class not_abelian_subalgebra : public validation_error {
 public:
  using validation_error::validation_error;
};

class derived_not_contained : public validation_error {
 public:
  using validation_error::validation_error;
};

class bad_partition : public validation_error {
 public:
  using validation_error::validation_error;
};

class prefix_not_subalgebra : public validation_error {
 public:
  explicit prefix_not_subalgebra(std::size_t k)
      : validation_error("prefix of length " + std::to_string(k) + " is not a subalgebra"), k_(k) {}
  std::size_t length() const noexcept { return k_; }

 private:
  std::size_t k_;
};

class not_stratifiable : public validation_error {
 public:
  using validation_error::validation_error;
};

class not_metabelian : public validation_error {
 public:
  using validation_error::validation_error;
};

class frame_inconsistent : public validation_error {
 public:
  frame_inconsistent(std::size_t a, std::size_t b)
      : validation_error("coordinate frame does not reproduce [e" + std::to_string(a + 1) + ", e" +
                         std::to_string(b + 1) + "]"),
        a_(a), b_(b) {}
  std::size_t a() const noexcept { return a_; }
  std::size_t b() const noexcept { return b_; }

 private:
  std::size_t a_, b_;
};

class unsupported_metric : public validation_error {
 public:
  using validation_error::validation_error;
};

// Polynomials.

class degree_cap_exceeded : public validation_error {
 public:
  using validation_error::validation_error;
};

class unknown_variable : public validation_error {
 public:
  using validation_error::validation_error;
};

class dimension_mismatch : public validation_error {
 public:
  using validation_error::validation_error;
};

// Reduction, catalog, analysis preconditions.

class empty_potential : public validation_error {
 public:
  using validation_error::validation_error;
};

class bad_parameter : public validation_error {
 public:
  using validation_error::validation_error;
};

class unknown_entry : public validation_error {
 public:
  using validation_error::validation_error;
};

class precondition_x_not_abelian : public validation_error {
 public:
  using validation_error::validation_error;
};

class not_unit_energy : public validation_error {
 public:
  using validation_error::validation_error;
};

// Numerics.

class energy_drift_exceeded : public numeric_error {
 public:
  energy_drift_exceeded(double time, double drift)
      : numeric_error("relative energy drift " + std::to_string(drift) + " exceeds tolerance at t = " +
                      std::to_string(time)),
        time_(time), drift_(drift) {}
  double time() const noexcept { return time_; }
  double drift() const noexcept { return drift_; }

 private:
  double time_, drift_;
};

class non_finite_state : public numeric_error {
 public:
  explicit non_finite_state(double time)
      : numeric_error("non-finite state at t = " + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class grid_too_coarse : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

}  // namespace carnot
