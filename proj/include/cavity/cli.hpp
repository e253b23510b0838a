#pragma once

namespace cavity::cli {

/// Entry point behind the cavity-dressed binary. Exit codes: 0 success,
/// 2 configuration error, 3 numerical/runtime failure.
int run(int argc, const char* const* argv);

}  // namespace cavity::cli
