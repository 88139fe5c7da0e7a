#include "djsr/binary_io.hpp"

#include <fstream>
#include <iterator>

namespace djsr {

void ByteWriter::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ByteReader ByteReader::load(const std::filesystem::path& path) {
    return ByteReader(read_file(path), path.string());
}

}  // namespace djsr
