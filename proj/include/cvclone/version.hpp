#pragma once

#define CVCLONE_VERSION "0.1.0"

namespace cvclone {
inline const char* version() { return CVCLONE_VERSION; }
}
