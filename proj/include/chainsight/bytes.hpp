#pragma once

// Little-endian encoding helpers shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "chainsight/errors.hpp"

namespace chainsight::bytes {

template <class T>
void append_le(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    out.append(buf, sizeof(T));
}

// Cursor over an in-memory buffer; running past the end is a TruncatedPayload.
class Reader {
  public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <class T>
    T read_le() {
        static_assert(std::is_trivially_copyable_v<T>);
        char buf[sizeof(T)];
        std::memcpy(buf, take(sizeof(T)).data(), sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
        }
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }

    std::string_view take(std::size_t n) {
        if (n > data_.size() - pos_) throw TruncatedPayload("payload ends before expected " + std::to_string(n) + " bytes");
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

  private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

} // namespace chainsight::bytes
