#include "pulseox/codec.hpp"

#include <sstream>

#include "pulseox/errors.hpp"

namespace pulseox::i2c {

void I2CMessage::validate() const {
    if (address >= 128) throw DomainError("i2c address must fit in 7 bits");
    if (acks.size() != payload.size() + 1)
        throw DomainError("i2c message needs one ack per frame (address + each byte)");
    if (address_nacked() && !payload.empty())
        throw DomainError("a NACKed address frame cannot carry payload");
}

I2CMessage I2CMessage::make(std::uint8_t address, Rw rw, std::vector<std::uint8_t> payload) {
    I2CMessage m;
    m.address = address;
    m.rw = rw;
    m.payload = std::move(payload);
    m.acks.assign(m.payload.size() + 1, true);
    m.validate();
    return m;
}

namespace {

void push_byte(BitStream& out, std::uint8_t value) {
    for (int b = 7; b >= 0; --b)
        out.push_back((value >> b) & 1 ? Sym::bit1 : Sym::bit0);
}

}  // namespace

BitStream encode(const I2CMessage& msg) {
    msg.validate();
    BitStream out;
    out.reserve(2 + 9 * (1 + msg.payload.size()));
    out.push_back(Sym::start);
    push_byte(out, static_cast<std::uint8_t>((msg.address << 1) |
                                             (msg.rw == Rw::read ? 1 : 0)));
    out.push_back(msg.acks[0] ? Sym::ack : Sym::nack);
    for (std::size_t i = 0; i < msg.payload.size(); ++i) {
        push_byte(out, msg.payload[i]);
        out.push_back(msg.acks[i + 1] ? Sym::ack : Sym::nack);
    }
    out.push_back(Sym::stop);
    return out;
}

const char* to_string(DecodeErrorKind kind) {
    switch (kind) {
        case DecodeErrorKind::missing_start: return "missing_start";
        case DecodeErrorKind::missing_stop: return "missing_stop";
        case DecodeErrorKind::misplaced_start: return "misplaced_start";
        case DecodeErrorKind::missing_ack: return "missing_ack";
        case DecodeErrorKind::misplaced_ack: return "misplaced_ack";
        case DecodeErrorKind::frame_not_byte_aligned: return "frame_not_byte_aligned";
        case DecodeErrorKind::missing_address: return "missing_address";
        case DecodeErrorKind::trailing_symbols: return "trailing_symbols";
    }
    return "?";
}

DecodeResult decode(const BitStream& bits) {
    const std::size_t n = bits.size();
    auto fail = [](DecodeErrorKind kind, std::size_t offset) {
        DecodeResult r;
        r.error = {kind, offset};
        return r;
    };

    if (n == 0 || bits[0] != Sym::start) return fail(DecodeErrorKind::missing_start, 0);

    I2CMessage msg;
    std::size_t i = 1;
    std::size_t frames = 0;
    std::size_t stop_at = n;  // n = not seen

    while (stop_at == n) {
        // one frame: exactly 8 data bits, then ack/nack
        unsigned value = 0;
        int bitcount = 0;
        bool frame_done = false;
        while (!frame_done) {
            if (i >= n) return fail(DecodeErrorKind::missing_stop, n);
            switch (bits[i]) {
                case Sym::bit0:
                case Sym::bit1:
                    if (bitcount == 8) return fail(DecodeErrorKind::missing_ack, i);
                    value = (value << 1) | (bits[i] == Sym::bit1 ? 1u : 0u);
                    ++bitcount;
                    ++i;
                    break;
                case Sym::start:
                    return fail(DecodeErrorKind::misplaced_start, i);
                case Sym::stop:
                    if (bitcount == 0) {
                        if (frames == 0) return fail(DecodeErrorKind::missing_address, i);
                        stop_at = i;  // clean end after a completed frame
                        frame_done = true;
                        break;
                    }
                    if (bitcount < 8) return fail(DecodeErrorKind::frame_not_byte_aligned, i);
                    return fail(DecodeErrorKind::missing_ack, i);
                case Sym::ack:
                case Sym::nack: {
                    if (bitcount < 8) return fail(DecodeErrorKind::misplaced_ack, i);
                    const bool acked = bits[i] == Sym::ack;
                    msg.acks.push_back(acked);
                    ++i;
                    ++frames;
                    if (frames == 1) {
                        msg.address = static_cast<std::uint8_t>(value >> 1);
                        msg.rw = (value & 1) ? Rw::read : Rw::write;
                        if (!acked) {
                            // an aborted transaction: only STOP may follow
                            if (i >= n) return fail(DecodeErrorKind::missing_stop, n);
                            if (bits[i] != Sym::stop)
                                return fail(DecodeErrorKind::trailing_symbols, i);
                            stop_at = i;
                        }
                    } else {
                        msg.payload.push_back(static_cast<std::uint8_t>(value));
                    }
                    frame_done = true;
                    break;
                }
            }
        }
    }

    if (stop_at + 1 != n) return fail(DecodeErrorKind::trailing_symbols, stop_at + 1);

    DecodeResult r;
    r.ok = true;
    r.msg = std::move(msg);
    return r;
}

std::string to_text(const BitStream& bits) {
    std::string out;
    int run = 0;               // bits in the current frame so far
    bool addr_frame = false;   // the rw bit prints apart from the address bits
    for (const Sym s : bits) {
        const bool is_bit = s == Sym::bit0 || s == Sym::bit1;
        const bool glue = is_bit && run > 0 && !(addr_frame && run == 7);
        if (!out.empty() && !glue) out += ' ';
        switch (s) {
            case Sym::start: out += 'S'; break;
            case Sym::stop: out += 'P'; break;
            case Sym::ack: out += 'A'; break;
            case Sym::nack: out += 'N'; break;
            case Sym::bit0: out += '0'; break;
            case Sym::bit1: out += '1'; break;
        }
        if (s == Sym::start) {
            addr_frame = true;
            run = 0;
        } else if (is_bit) {
            ++run;
        } else {
            addr_frame = false;
            run = 0;
        }
    }
    return out;
}

BitStream from_text(const std::string& text) {
    BitStream out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        if (tok == "S") {
            out.push_back(Sym::start);
        } else if (tok == "P") {
            out.push_back(Sym::stop);
        } else if (tok == "A") {
            out.push_back(Sym::ack);
        } else if (tok == "N") {
            out.push_back(Sym::nack);
        } else {
            for (char c : tok) {
                if (c == '0') out.push_back(Sym::bit0);
                else if (c == '1') out.push_back(Sym::bit1);
                else throw IoError("bad bitstream token: '" + tok + "'");
            }
        }
    }
    return out;
}

}  // namespace pulseox::i2c
