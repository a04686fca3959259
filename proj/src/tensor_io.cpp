#include "agmn/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "agmn/error.hpp"

namespace agmn {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'G', 'T', '1'};
constexpr std::size_t kHeaderSize = 8;
// Refuse element counts beyond 2^31; a 21x46x46 map is ~44k.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename U>
U get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[offset + i]) << (8 * i);
    return value;
}

Error format_error(std::size_t offset, const std::string& what) {
    return Error(Errc::format, "byte " + std::to_string(offset) + ": " + what);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const TensorStack& stack, DType dtype) {
    const std::size_t elem = dtype == DType::f32 ? 4 : 8;
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + 12 + stack.values().size() * elem);
    for (std::uint8_t b : kMagic) out.push_back(b);
    out.push_back(static_cast<std::uint8_t>(dtype));
    out.push_back(3);
    out.push_back(0);
    out.push_back(0);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stack.channels()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stack.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(stack.cols()));
    for (double v : stack.values()) {
        if (dtype == DType::f32) {
            put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        } else {
            put_le(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

TensorStack decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw format_error(bytes.size(), "file shorter than the 8-byte header");
    for (std::size_t i = 0; i < 4; ++i) {
        if (bytes[i] != kMagic[i]) throw format_error(0, "bad magic, expected \"AGT1\"");
    }
    const std::uint8_t dtype = bytes[4];
    if (dtype != 1 && dtype != 2) throw format_error(4, "unknown dtype " + std::to_string(dtype));
    const std::uint8_t ndim = bytes[5];
    if (ndim != 2 && ndim != 3) throw format_error(5, "ndim must be 2 or 3, got " + std::to_string(ndim));
    if (bytes[6] != 0 || bytes[7] != 0) throw format_error(6, "reserved bytes must be zero");

    const std::size_t dims_end = kHeaderSize + 4u * ndim;
    if (bytes.size() < dims_end) throw format_error(bytes.size(), "truncated dimension block");
    std::uint32_t dims[3] = {1, 0, 0};
    for (std::size_t d = 0; d < ndim; ++d) {
        const std::size_t offset = kHeaderSize + 4 * d;
        const std::uint32_t v = get_le<std::uint32_t>(bytes, offset);
        if (v == 0) throw format_error(offset, "zero dimension");
        if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
            throw format_error(offset, "dimension overflow");
        }
        dims[3 - ndim + d] = v;
    }
    std::uint64_t count = 1;
    for (std::uint32_t d : dims) {
        count *= d;
        if (count > kMaxElements) throw format_error(kHeaderSize, "dimension overflow, element count too large");
    }

    const std::size_t elem = dtype == 1 ? 4 : 8;
    const std::uint64_t expected = dims_end + count * elem;
    if (bytes.size() < expected) {
        throw format_error(bytes.size(), "truncated payload, expected " + std::to_string(expected) + " bytes");
    }
    if (bytes.size() > expected) throw format_error(expected, "trailing bytes after payload");

    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t offset = dims_end + i * elem;
        data[i] = dtype == 1 ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset)))
                             : std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
    }
    return TensorStack(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                       std::move(data));
}

void write_tensor(const TensorStack& stack, const std::filesystem::path& path, DType dtype) {
    const auto bytes = encode_tensor(stack, dtype);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

TensorStack read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_tensor(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

}  // namespace agmn
