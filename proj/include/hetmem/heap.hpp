#pragma once

// Sub-allocators for a resource memory region.
//
// BitsetHeap divides the region into fixed-size blocks and keeps one usage
// bit per block. Allocation is a lowest-offset first-fit scan for a
// contiguous run of free blocks; the scan is deliberately exhaustive, which
// is the scheme's cost profile.
//
// NextFitHeap keeps an ordered segment list over the region with a rolling
// cursor. Allocation splits the first fitting free segment exactly at the
// requested size (wrapping once past the region end); freeing merges the
// segment with free neighbours so no two adjacent free segments ever exist.
//
// Heaps are single-writer: callers serialize access externally.

#include <cstdint>
#include <list>
#include <vector>

#include "hetmem/errors.hpp"

namespace hetmem {

class Heap {
 public:
  virtual ~Heap() = default;

  /// Reserves `size` bytes and returns the byte offset of the allocation.
  /// Throws OutOfResourceMemory when no placement exists.
  virtual uint64_t alloc(uint64_t size) = 0;

  /// Releases an allocation previously returned by alloc(). `size` must be
  /// the original request size.
  virtual void free(uint64_t offset, uint64_t size) = 0;

  virtual uint64_t capacity() const = 0;
  virtual uint64_t free_bytes() const = 0;

  /// Bookkeeping footprint in bytes: ceil(block_count/8) for the bitset
  /// scheme, 17 bytes per segment entry for the next-fit scheme.
  virtual uint64_t metadata_footprint() const = 0;
};

class BitsetHeap final : public Heap {
 public:
  /// `block_size` must be a power of two and divide `capacity`; it stays
  /// fixed for the heap's lifetime.
  BitsetHeap(uint64_t capacity, uint64_t block_size);

  uint64_t alloc(uint64_t size) override;
  void free(uint64_t offset, uint64_t size) override;

  uint64_t capacity() const override { return capacity_; }
  uint64_t free_bytes() const override;
  uint64_t metadata_footprint() const override;

  uint64_t block_size() const { return block_size_; }
  uint64_t block_count() const { return block_count_; }
  uint64_t used_blocks() const { return used_blocks_; }
  bool is_block_used(uint64_t block) const;

 private:
  void set_block(uint64_t block);
  void clear_block(uint64_t block);

  uint64_t capacity_ = 0;
  uint64_t block_size_ = 0;
  uint64_t block_count_ = 0;
  uint64_t used_blocks_ = 0;
  std::vector<uint64_t> bits_;
};

class NextFitHeap final : public Heap {
 public:
  static constexpr uint64_t kMetadataBytesPerEntry = 17;

  struct Segment {
    uint64_t offset = 0;
    uint64_t size = 0;
    bool used = false;
  };

  explicit NextFitHeap(uint64_t capacity);

  uint64_t alloc(uint64_t size) override;
  void free(uint64_t offset, uint64_t size) override;

  /// Next-fit frees need only the offset; the segment carries its size.
  void free(uint64_t offset);

  uint64_t capacity() const override { return capacity_; }
  uint64_t free_bytes() const override { return free_bytes_; }
  uint64_t metadata_footprint() const override;

  uint64_t segment_count() const { return segments_.size(); }
  uint64_t cursor_offset() const { return cursor_->offset; }

  /// Snapshot of the segment list in offset order (test/introspection aid).
  std::vector<Segment> segments() const;

 private:
  using SegmentList = std::list<Segment>;
  using SegmentIter = SegmentList::iterator;

  SegmentIter next_wrapped(SegmentIter it);

  uint64_t capacity_ = 0;
  uint64_t free_bytes_ = 0;
  SegmentList segments_;
  SegmentIter cursor_;
};

}  // namespace hetmem
