#include "httptap/pcap.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>

namespace httptap {

namespace {

constexpr uint32_t kMagicMicro = 0xA1B2C3D4u;
constexpr uint32_t kMagicNano = 0xA1B23C4Du;
constexpr size_t kGlobalHeaderLen = 24;
constexpr size_t kRecordHeaderLen = 16;

inline uint32_t bswap32(uint32_t v) { return __builtin_bswap32(v); }

inline uint32_t rd_u32(const uint8_t* p, bool swap) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return swap ? bswap32(v) : v;
}

inline void put_u32(std::vector<uint8_t>& buf, uint32_t v) {
    uint8_t b[4];
    std::memcpy(b, &v, 4);
    buf.insert(buf.end(), b, b + 4);
}

inline void put_u16(std::vector<uint8_t>& buf, uint16_t v) {
    uint8_t b[2];
    std::memcpy(b, &v, 2);
    buf.insert(buf.end(), b, b + 2);
}

}  // namespace

const char* pcap_error_name(PcapError e) {
    switch (e) {
        case PcapError::TruncatedHeader: return "TruncatedHeader";
        case PcapError::BadMagic: return "BadMagic";
        case PcapError::UnsupportedLinkType: return "UnsupportedLinkType";
        case PcapError::Io: return "Io";
    }
    return "?";
}

PcapReader::PcapReader(std::span<const uint8_t> data) : data_(data) {
    if (data_.size() < kGlobalHeaderLen) {
        throw PcapFormatError(PcapError::TruncatedHeader,
                              "pcap: file shorter than global header");
    }
    uint32_t magic = rd_u32(data_.data(), false);
    if (magic == kMagicMicro) {
        nano_ = false; swap_ = false;
    } else if (magic == kMagicNano) {
        nano_ = true; swap_ = false;
    } else if (bswap32(magic) == kMagicMicro) {
        nano_ = false; swap_ = true;
    } else if (bswap32(magic) == kMagicNano) {
        nano_ = true; swap_ = true;
    } else {
        throw PcapFormatError(PcapError::BadMagic, "pcap: unrecognized magic");
    }
    uint32_t linktype = rd_u32(data_.data() + 20, swap_);
    if (linktype != 1) {
        throw PcapFormatError(PcapError::UnsupportedLinkType,
                              "pcap: linktype " + std::to_string(linktype) +
                                  " not supported (need 1 = Ethernet)");
    }
    pos_ = kGlobalHeaderLen;
}

bool PcapReader::next(FrameView& out) {
    if (pos_ + kRecordHeaderLen > data_.size()) return false;
    const uint8_t* h = data_.data() + pos_;
    uint32_t ts_sec = rd_u32(h, swap_);
    uint32_t ts_frac = rd_u32(h + 4, swap_);
    uint32_t incl_len = rd_u32(h + 8, swap_);
    out.orig_len = rd_u32(h + 12, swap_);
    if (pos_ + kRecordHeaderLen + incl_len > data_.size()) return false;  // truncated tail
    out.ts = nano_ ? CaptureTimestamp::from_nanos_parts(ts_sec, ts_frac)
                   : CaptureTimestamp::from_micros(ts_sec, ts_frac);
    out.bytes = data_.subspan(pos_ + kRecordHeaderLen, incl_len);
    pos_ += kRecordHeaderLen + incl_len;
    ++frames_;
    return true;
}

MappedFile::MappedFile(const std::string& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) {
        throw PcapFormatError(PcapError::Io, "cannot open " + path);
    }
    struct stat st{};
    if (::fstat(fd, &st) != 0) {
        ::close(fd);
        throw PcapFormatError(PcapError::Io, "cannot stat " + path);
    }
    size_ = static_cast<size_t>(st.st_size);
    if (size_ == 0) {
        ::close(fd);
        addr_ = nullptr;
        return;
    }
    void* m = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (m != MAP_FAILED) {
        ::madvise(m, size_, MADV_SEQUENTIAL);
        addr_ = m;
        mapped_ = true;
        ::close(fd);
        return;
    }
    // mmap can fail on odd filesystems; fall back to a plain read.
    addr_ = ::malloc(size_);
    if (addr_ == nullptr) {
        ::close(fd);
        throw PcapFormatError(PcapError::Io, "out of memory reading " + path);
    }
    size_t got = 0;
    while (got < size_) {
        ssize_t n = ::read(fd, static_cast<uint8_t*>(addr_) + got, size_ - got);
        if (n <= 0) {
            ::free(addr_);
            ::close(fd);
            throw PcapFormatError(PcapError::Io, "short read on " + path);
        }
        got += static_cast<size_t>(n);
    }
    ::close(fd);
}

MappedFile::~MappedFile() {
    if (addr_ != nullptr) {
        if (mapped_) {
            ::munmap(addr_, size_);
        } else {
            ::free(addr_);
        }
    }
}

MappedFile::MappedFile(MappedFile&& other) noexcept
    : addr_(other.addr_), size_(other.size_), mapped_(other.mapped_) {
    other.addr_ = nullptr;
    other.size_ = 0;
}

MappedFile& MappedFile::operator=(MappedFile&& other) noexcept {
    if (this != &other) {
        this->~MappedFile();
        addr_ = other.addr_;
        size_ = other.size_;
        mapped_ = other.mapped_;
        other.addr_ = nullptr;
        other.size_ = 0;
    }
    return *this;
}

PcapWriter::PcapWriter(uint32_t snaplen) {
    put_u32(buf_, kMagicNano);
    put_u16(buf_, 2);   // version major
    put_u16(buf_, 4);   // version minor
    put_u32(buf_, 0);   // thiszone
    put_u32(buf_, 0);   // sigfigs
    put_u32(buf_, snaplen);
    put_u32(buf_, 1);   // linktype: Ethernet
}

void PcapWriter::add_frame(const CaptureTimestamp& ts, std::span<const uint8_t> frame) {
    put_u32(buf_, static_cast<uint32_t>(ts.seconds));
    put_u32(buf_, ts.nanos);
    put_u32(buf_, static_cast<uint32_t>(frame.size()));
    put_u32(buf_, static_cast<uint32_t>(frame.size()));
    buf_.insert(buf_.end(), frame.begin(), frame.end());
}

void PcapWriter::write_file(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) {
        throw PcapFormatError(PcapError::Io, "cannot write " + path);
    }
    size_t n = std::fwrite(buf_.data(), 1, buf_.size(), f);
    std::fclose(f);
    if (n != buf_.size()) {
        throw PcapFormatError(PcapError::Io, "short write on " + path);
    }
}

}  // namespace httptap
