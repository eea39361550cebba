#ifndef HSMKIT_VERSION_HPP
#define HSMKIT_VERSION_HPP

#define HSMKIT_VERSION_MAJOR 1
#define HSMKIT_VERSION_MINOR 0
#define HSMKIT_VERSION_PATCH 0
#define HSMKIT_VERSION_STRING "1.0.0"

namespace hsmkit {

inline const char* version() { return HSMKIT_VERSION_STRING; }

}

#endif
