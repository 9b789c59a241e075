#include "bondsat/errors.hpp"

namespace bondsat {

const char *errc_name(errc code) {
    switch (code) {
    case errc::structural: return "structural error";
    case errc::parse: return "parse error";
    case errc::stage: return "stage error";
    case errc::bond_too_small: return "bond too small";
    case errc::cyclic_bond: return "cyclic bond";
    case errc::not_rebuilt: return "graph not rebuilt";
    case errc::incomplete_extraction: return "incomplete extraction";
    case errc::cycle: return "cycle";
    case errc::width_mismatch: return "width mismatch";
    case errc::unknown_name: return "unknown name";
    case errc::bad_value: return "bad value";
    case errc::unbound_advice: return "unbound advice";
    case errc::signature_mismatch: return "signature mismatch";
    case errc::unextractable: return "unextractable";
    case errc::too_large: return "too large";
    }
    return "error";
}

} // namespace bondsat
