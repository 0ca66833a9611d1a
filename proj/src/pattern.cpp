#include "factcause/pattern.hpp"

#include "factcause/error.hpp"

namespace factcause {

Template Template::parse(std::string_view text) {
    auto count = [&](std::string_view slot) {
        std::size_t n = 0;
        for (auto p = text.find(slot); p != std::string_view::npos; p = text.find(slot, p + 1)) ++n;
        return n;
    };
    const std::size_t xs = count(kSubjectSlot);
    const std::size_t ys = count(kObjectSlot);
    if (xs != 1 || ys != 1)
        throw Error(Errc::MalformedPattern, "template '" + std::string(text) + "' has " + std::to_string(xs) +
                                                " [X] and " + std::to_string(ys) + " [Y] slots, expected one each");
    Template t;
    t.text_ = std::string(text);
    t.x_pos_ = text.find(kSubjectSlot);
    t.y_pos_ = text.find(kObjectSlot);
    return t;
}

std::string Template::fill(std::string_view subject, std::string_view object) const {
    const bool x_first = x_pos_ < y_pos_;
    const std::size_t first = x_first ? x_pos_ : y_pos_;
    const std::size_t second = x_first ? y_pos_ : x_pos_;
    std::string out;
    out.append(text_, 0, first);
    out.append(x_first ? subject : object);
    out.append(text_, first + 3, second - first - 3);
    out.append(x_first ? object : subject);
    out.append(text_, second + 3, std::string::npos);
    return out;
}

std::string Template::instantiate(std::string_view subject, std::string_view object) const {
    return fill(subject, object);
}

std::string Template::cloze(std::string_view subject, std::string_view mask) const { return fill(subject, mask); }

Template::Frame Template::subject_frame(std::string_view object) const {
    Frame f;
    if (x_pos_ < y_pos_) {
        f.before = text_.substr(0, x_pos_);
        f.after = text_.substr(x_pos_ + 3, y_pos_ - x_pos_ - 3);
        f.after.append(object);
        f.after.append(text_, y_pos_ + 3, std::string::npos);
    } else {
        f.before = text_.substr(0, y_pos_);
        f.before.append(object);
        f.before.append(text_, y_pos_ + 3, x_pos_ - y_pos_ - 3);
        f.after = text_.substr(x_pos_ + 3);
    }
    return f;
}

} // namespace factcause
