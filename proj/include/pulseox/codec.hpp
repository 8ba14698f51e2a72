#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pulseox::i2c {

// Symbol-level bus model: explicit start/stop conditions, data bits and
// per-frame acknowledgments.  No clocking or electrical behavior.
enum class Sym : std::uint8_t { start, bit0, bit1, ack, nack, stop };

using BitStream = std::vector<Sym>;

enum class Rw : std::uint8_t { write = 0, read = 1 };

// One bus transaction: a 7-bit address frame (address + rw bit) followed by
// zero or more 8-bit data frames.  acks[0] answers the address frame,
// acks[1 + i] answers payload byte i.  A NACKed address carries no payload.
struct I2CMessage {
    std::uint8_t address = 0;
    Rw rw = Rw::write;
    std::vector<std::uint8_t> payload;
    std::vector<bool> acks;

    bool address_nacked() const { return !acks.empty() && !acks.front(); }
    void validate() const;  // throws DomainError on a malformed message

    static I2CMessage make(std::uint8_t address, Rw rw, std::vector<std::uint8_t> payload);
};

BitStream encode(const I2CMessage& msg);  // throws DomainError via validate()

enum class DecodeErrorKind {
    missing_start,
    missing_stop,
    misplaced_start,
    missing_ack,
    misplaced_ack,
    frame_not_byte_aligned,
    missing_address,
    trailing_symbols,
};

const char* to_string(DecodeErrorKind kind);

// offset indexes the offending symbol; for truncation it equals the stream
// length, i.e. the position where the next symbol was expected.
struct DecodeError {
    DecodeErrorKind kind = DecodeErrorKind::missing_start;
    std::size_t offset = 0;
};

struct DecodeResult {
    bool ok = false;
    I2CMessage msg;
    DecodeError error;
};

DecodeResult decode(const BitStream& bits);

// Fixture text form: tokens separated by single spaces; S/P/A/N for
// start/stop/ack/nack and runs of 0/1 for data bits ("S 1010111 0 A P").
std::string to_text(const BitStream& bits);
BitStream from_text(const std::string& text);  // throws IoError on a bad token

}  // namespace pulseox::i2c
