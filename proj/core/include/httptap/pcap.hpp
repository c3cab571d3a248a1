// Classic PCAP container reading and writing.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "httptap/time.hpp"

namespace httptap {

enum class PcapError : uint8_t {
    TruncatedHeader,     // file shorter than the 24-byte global header
    BadMagic,            // unrecognized magic number
    UnsupportedLinkType, // linktype other than 1 (Ethernet)
    Io,                  // file could not be opened or read
};

const char* pcap_error_name(PcapError e);

class PcapFormatError : public std::runtime_error {
public:
    PcapFormatError(PcapError code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    PcapError code() const { return code_; }

private:
    PcapError code_;
};

// One captured frame: timestamp plus the captured bytes. `bytes` aliases
// the reader's underlying buffer.
struct FrameView {
    CaptureTimestamp ts;
    std::span<const uint8_t> bytes;
    uint32_t orig_len = 0;
};

// Streaming reader over an in-memory classic PCAP image. Accepts magics
// 0xA1B2C3D4 (microsecond) and 0xA1B23C4D (nanosecond) in either byte
// order; any other magic throws BadMagic. Linktype must be 1 (Ethernet).
// Microsecond timestamps are widened to nanoseconds. A truncated trailing
// record ends iteration cleanly.
class PcapReader {
public:
    explicit PcapReader(std::span<const uint8_t> data);

    // Advances to the next frame. Returns false at end of stream.
    bool next(FrameView& out);

    bool nanosecond_resolution() const { return nano_; }
    bool swapped() const { return swap_; }
    uint64_t frames_read() const { return frames_; }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    uint64_t frames_ = 0;
    bool nano_ = false;
    bool swap_ = false;
};

// Memory-maps (or, failing that, reads) a whole file so a PcapReader can
// walk it without copies. Throws PcapFormatError(Io) when unreadable.
class MappedFile {
public:
    explicit MappedFile(const std::string& path);
    ~MappedFile();

    MappedFile(const MappedFile&) = delete;
    MappedFile& operator=(const MappedFile&) = delete;
    MappedFile(MappedFile&& other) noexcept;
    MappedFile& operator=(MappedFile&& other) noexcept;

    std::span<const uint8_t> bytes() const {
        return {static_cast<const uint8_t*>(addr_), size_};
    }

private:
    void* addr_ = nullptr;
    size_t size_ = 0;
    bool mapped_ = false;
};

// Accumulates a classic PCAP image in memory. Writes the nanosecond magic
// (0xA1B23C4D), version 2.4, linktype 1.
class PcapWriter {
public:
    explicit PcapWriter(uint32_t snaplen = 262144);

    void add_frame(const CaptureTimestamp& ts, std::span<const uint8_t> frame);

    const std::vector<uint8_t>& bytes() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }
    void write_file(const std::string& path) const;

private:
    std::vector<uint8_t> buf_;
};

}  // namespace httptap
