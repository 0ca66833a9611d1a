#pragma once

#include <string>
#include <string_view>

namespace factcause {

inline constexpr std::string_view kSubjectSlot = "[X]";
inline constexpr std::string_view kObjectSlot = "[Y]";
inline constexpr std::string_view kDefaultMask = "[MASK]";

/// A relation template holding exactly one subject slot and one object slot.
class Template {
public:
    /// Throws MalformedPattern when a slot is missing or repeated.
    static Template parse(std::string_view text);

    const std::string& text() const { return text_; }

    std::string instantiate(std::string_view subject, std::string_view object) const;
    std::string cloze(std::string_view subject, std::string_view mask = kDefaultMask) const;

    /// Literal text before and after the subject slot once the object slot
    /// is filled in.
    struct Frame {
        std::string before;
        std::string after;
    };
    Frame subject_frame(std::string_view object) const;

    friend bool operator==(const Template& a, const Template& b) { return a.text_ == b.text_; }

private:
    std::string fill(std::string_view subject, std::string_view object) const;

    std::string text_;
    std::size_t x_pos_ = 0;
    std::size_t y_pos_ = 0;
};

} // namespace factcause
