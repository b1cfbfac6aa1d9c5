#pragma once

namespace aaetag {

/// Binary per-feature label: positive means the feature is present (a `1` in its column).
enum class Label { negative = 0, positive = 1 };

[[nodiscard]] constexpr int to_int(Label l) noexcept { return l == Label::positive ? 1 : 0; }
[[nodiscard]] constexpr Label label_from_bool(bool present) noexcept {
    return present ? Label::positive : Label::negative;
}

}  // namespace aaetag
