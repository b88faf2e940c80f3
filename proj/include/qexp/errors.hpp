#ifndef QEXP_ERRORS_HPP
#define QEXP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qexp
{

/// Base class of every error thrown by the library.
class error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class invalid_input_error : public error
{
  public:
    using error::error;
};

class conditioning_error : public error
{
  public:
    using error::error;
};

/// Evaluation hit a pole; `location` is the offending point (e.g. z_i).
class pole_error : public error
{
  public:
    pole_error(const std::string &what, std::string location)
        : error(what), location_(std::move(location))
    {
    }
    const std::string &location() const noexcept { return location_; }

  private:
    std::string location_;
};

class resource_error : public error
{
  public:
    using error::error;
};

class precondition_error : public error
{
  public:
    using error::error;
};

/// A numerically checked identity failed beyond tolerance.
class theorem_violation : public error
{
  public:
    theorem_violation(const std::string &what, std::string tag)
        : error(what), tag_(std::move(tag))
    {
    }
    const std::string &tag() const noexcept { return tag_; }

  private:
    std::string tag_;
};

class path_failure : public error
{
  public:
    using error::error;
};

class independence_failure : public error
{
  public:
    using error::error;
};

} // namespace qexp

#endif
