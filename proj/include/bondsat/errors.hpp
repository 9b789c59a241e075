#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace bondsat {

enum class errc {
    structural,
    parse,
    stage,
    bond_too_small,
    cyclic_bond,
    not_rebuilt,
    incomplete_extraction,
    cycle,
    width_mismatch,
    unknown_name,
    bad_value,
    unbound_advice,
    signature_mismatch,
    unextractable,
    too_large,
};

const char *errc_name(errc code);

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string &msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string &msg) { throw Error(code, msg); }

} // namespace bondsat
