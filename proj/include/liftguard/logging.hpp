#pragma once

namespace liftguard {

// Reads LIFTGUARD_LOG (trace, debug, info, warn, error, critical, off) and
// applies it to the default logger. Unset or unrecognised values mean warn.
void init_logging();

}  // namespace liftguard
