#include "hetmem/heap.hpp"

#include <bit>
#include <string>

namespace hetmem {

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

}  // namespace

// ----- BitsetHeap -------------------------------------------------------------

BitsetHeap::BitsetHeap(uint64_t capacity, uint64_t block_size)
    : capacity_(capacity), block_size_(block_size) {
  if (capacity == 0) raise(ErrorCode::InvalidArgument, "bitset heap capacity must be positive");
  if (block_size == 0 || !std::has_single_bit(block_size))
    raise(ErrorCode::InvalidArgument, "block size must be a power of two");
  if (capacity % block_size != 0)
    raise(ErrorCode::InvalidArgument, "block size must divide the region capacity");
  block_count_ = ceil_div(capacity_, block_size_);
  bits_.assign(ceil_div(block_count_, 64), 0);
}

bool BitsetHeap::is_block_used(uint64_t block) const {
  return (bits_[block >> 6] >> (block & 63)) & 1;
}

void BitsetHeap::set_block(uint64_t block) { bits_[block >> 6] |= uint64_t{1} << (block & 63); }

void BitsetHeap::clear_block(uint64_t block) { bits_[block >> 6] &= ~(uint64_t{1} << (block & 63)); }

uint64_t BitsetHeap::alloc(uint64_t size) {
  if (size == 0) raise(ErrorCode::InvalidArgument, "zero-size allocation");
  const uint64_t blocks = ceil_div(size, block_size_);
  if (blocks <= block_count_) {
    // Lowest-offset first-fit: probe every block until a long enough free
    // run appears. The scan restarts from block 0 on every request.
    uint64_t run = 0;
    for (uint64_t b = 0; b < block_count_; ++b) {
      if (is_block_used(b)) {
        run = 0;
        continue;
      }
      if (++run == blocks) {
        const uint64_t start = b + 1 - blocks;
        for (uint64_t i = start; i <= b; ++i) set_block(i);
        used_blocks_ += blocks;
        return start * block_size_;
      }
    }
  }
  raise(ErrorCode::OutOfResourceMemory,
        "no contiguous run of " + std::to_string(blocks) + " free blocks");
}

void BitsetHeap::free(uint64_t offset, uint64_t size) {
  if (size == 0) raise(ErrorCode::InvalidFree, "zero-size free");
  if (offset % block_size_ != 0)
    raise(ErrorCode::InvalidFree, "offset " + std::to_string(offset) + " is not block-aligned");
  const uint64_t start = offset / block_size_;
  const uint64_t blocks = ceil_div(size, block_size_);
  if (start + blocks > block_count_)
    raise(ErrorCode::InvalidFree, "free range exceeds the region");
  for (uint64_t b = start; b < start + blocks; ++b)
    if (!is_block_used(b))
      raise(ErrorCode::InvalidFree, "block " + std::to_string(b) + " is already free");
  for (uint64_t b = start; b < start + blocks; ++b) clear_block(b);
  used_blocks_ -= blocks;
}

uint64_t BitsetHeap::free_bytes() const { return (block_count_ - used_blocks_) * block_size_; }

uint64_t BitsetHeap::metadata_footprint() const { return ceil_div(block_count_, 8); }

// ----- NextFitHeap ------------------------------------------------------------

NextFitHeap::NextFitHeap(uint64_t capacity) : capacity_(capacity), free_bytes_(capacity) {
  if (capacity == 0) raise(ErrorCode::InvalidArgument, "next-fit heap capacity must be positive");
  segments_.push_back(Segment{0, capacity, false});
  cursor_ = segments_.begin();
}

NextFitHeap::SegmentIter NextFitHeap::next_wrapped(SegmentIter it) {
  ++it;
  return it == segments_.end() ? segments_.begin() : it;
}

uint64_t NextFitHeap::alloc(uint64_t size) {
  if (size == 0) raise(ErrorCode::InvalidArgument, "zero-size allocation");
  auto it = cursor_;
  const size_t count = segments_.size();
  for (size_t visited = 0; visited < count; ++visited, it = next_wrapped(it)) {
    if (it->used || it->size < size) continue;
    const uint64_t offset = it->offset;
    if (it->size == size) {
      it->used = true;
      cursor_ = next_wrapped(it);
    } else {
      // Split: the leading piece takes exactly the request, the remainder
      // stays free and becomes the new search position.
      segments_.insert(it, Segment{offset, size, true});
      it->offset += size;
      it->size -= size;
      cursor_ = it;
    }
    free_bytes_ -= size;
    return offset;
  }
  raise(ErrorCode::OutOfResourceMemory,
        "no free segment of " + std::to_string(size) + " bytes after full wrap");
}

void NextFitHeap::free(uint64_t offset, uint64_t size) {
  auto it = segments_.begin();
  for (; it != segments_.end() && it->offset < offset; ++it) {
  }
  if (it == segments_.end() || it->offset != offset || !it->used)
    raise(ErrorCode::InvalidFree,
          "offset " + std::to_string(offset) + " does not start a used segment");
  if (size != 0 && it->size != size)
    raise(ErrorCode::InvalidFree, "size does not match the segment at this offset");

  it->used = false;
  free_bytes_ += it->size;

  auto next = std::next(it);
  if (next != segments_.end() && !next->used) {
    it->size += next->size;
    if (cursor_ == next) cursor_ = it;
    segments_.erase(next);
  }
  if (it != segments_.begin()) {
    auto prev = std::prev(it);
    if (!prev->used) {
      prev->size += it->size;
      if (cursor_ == it) cursor_ = prev;
      segments_.erase(it);
    }
  }
}

void NextFitHeap::free(uint64_t offset) { free(offset, 0); }

uint64_t NextFitHeap::metadata_footprint() const {
  return kMetadataBytesPerEntry * segments_.size();
}

std::vector<NextFitHeap::Segment> NextFitHeap::segments() const {
  return {segments_.begin(), segments_.end()};
}

}  // namespace hetmem
