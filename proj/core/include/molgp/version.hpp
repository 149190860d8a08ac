#ifndef MOLGP_VERSION_HPP
#define MOLGP_VERSION_HPP

#define MOLGP_VERSION_STRING "0.1.0"

namespace molgp {

inline const char* version() { return MOLGP_VERSION_STRING; }

}  // namespace molgp

#endif
