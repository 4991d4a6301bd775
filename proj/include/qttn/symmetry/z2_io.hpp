#pragma once

// "QTZ2" | version u16 | precision u8 | rank u8 | flux u8
// | per link: dim0 u64, dim1 u64, direction u8
// | block count u64 | per block: charge u8 per link, elements (little endian)

#include "qttn/symmetry/z2_tensor.hpp"
#include "qttn/tensor/binary_io.hpp"

namespace qttn {

inline constexpr std::uint16_t kZ2FormatVersion = 1;

template <Scalar T>
void write_z2(std::ostream& os, const Z2Tensor<T>& t) {
  io::write_magic(os, "QTZ2");
  io::write_le<std::uint16_t>(os, kZ2FormatVersion);
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(to_char(precision_of<T>())));
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.flux()));
  for (const auto& l : t.links()) {
    io::write_le<std::uint64_t>(os, l.sector_dims[0]);
    io::write_le<std::uint64_t>(os, l.sector_dims[1]);
    io::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(l.direction));
  }
  io::write_le<std::uint64_t>(os, t.blocks().size());
  for (const auto& [k, b] : t.blocks()) {
    for (auto c : k) io::write_le<std::uint8_t>(os, c);
    io::write_scalars<T>(os, b.data());
  }
}

template <Scalar T>
Z2Tensor<T> read_z2(std::istream& is) {
  io::expect_magic(is, "QTZ2");
  if (io::read_le<std::uint16_t>(is) != kZ2FormatVersion) throw io::FormatError("unsupported Z2 format version");
  if (static_cast<char>(io::read_le<std::uint8_t>(is)) != to_char(precision_of<T>()))
    throw PrecisionError("serialized Z2 tensor has a different precision");
  const std::size_t rank = io::read_le<std::uint8_t>(is);
  const int flux = io::read_le<std::uint8_t>(is);
  if (flux > 1) throw io::FormatError("bad flux");
  std::vector<Z2Link> links(rank);
  for (auto& l : links) {
    l.sector_dims[0] = io::read_le<std::uint64_t>(is);
    l.sector_dims[1] = io::read_le<std::uint64_t>(is);
    const auto d = io::read_le<std::uint8_t>(is);
    if (d > 1) throw io::FormatError("bad link direction");
    l.direction = static_cast<Z2Direction>(d);
  }
  Z2Tensor<T> t(std::move(links), flux);
  const auto nblocks = io::read_le<std::uint64_t>(is);
  if (nblocks > (1ull << rank)) throw io::FormatError("too many blocks");
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    ChargeKey key(rank);
    for (auto& c : key) c = io::read_le<std::uint8_t>(is);
    if (!t.allowed(key)) throw io::FormatError("stored block violates charge conservation");
    DenseTensor<T> blk(t.block_shape(key));
    io::read_scalars<T>(is, blk.data());
    t.set_block(key, std::move(blk));
  }
  return t;
}

}  // namespace qttn
