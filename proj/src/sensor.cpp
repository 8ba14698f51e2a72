#include "pulseox/sensor.hpp"

#include <string>

#include "pulseox/errors.hpp"

namespace pulseox::i2c {

SensorRegisterMap::SensorRegisterMap(SensorConfig cfg) : cfg_(cfg) {
    if (cfg_.address >= 128) throw DomainError("sensor address must fit in 7 bits");
    if (cfg_.fifo_capacity == 0) throw DomainError("sensor fifo capacity must be > 0");
    control_[reg_mode_config] = 0;
    control_[reg_spo2_config] = 0;
    control_[reg_led_config] = 0;
}

bool SensorRegisterMap::known_register(std::uint8_t reg) const {
    switch (reg) {
        case reg_fifo_wr_ptr:
        case reg_overflow_cnt:
        case reg_fifo_rd_ptr:
        case reg_fifo_data:
        case reg_mode_config:
        case reg_spo2_config:
        case reg_led_config:
        case reg_part_id:
            return true;
        default:
            return false;
    }
}

bool SensorRegisterMap::writable_register(std::uint8_t reg) const {
    return reg == reg_mode_config || reg == reg_spo2_config || reg == reg_led_config;
}

std::uint8_t SensorRegisterMap::register_value(std::uint8_t reg) const {
    switch (reg) {
        case reg_fifo_wr_ptr: return static_cast<std::uint8_t>(pushed_ % 32);
        case reg_overflow_cnt:
            return dropped_ > 255 ? std::uint8_t{255} : static_cast<std::uint8_t>(dropped_);
        case reg_fifo_rd_ptr: return static_cast<std::uint8_t>(popped_ % 32);
        case reg_part_id: return 0x11;
        case reg_mode_config:
        case reg_spo2_config:
        case reg_led_config:
            return control_.at(reg);
        default:
            throw DomainError("unknown sensor register " + std::to_string(reg));
    }
}

void SensorRegisterMap::push_sample(std::uint16_t ir, std::uint16_t red) {
    if (fifo_.size() == cfg_.fifo_capacity) {
        fifo_.pop_front();
        ++dropped_;
    }
    fifo_.push_back({static_cast<std::uint8_t>(ir >> 8), static_cast<std::uint8_t>(ir & 0xff),
                     static_cast<std::uint8_t>(red >> 8), static_cast<std::uint8_t>(red & 0xff)});
    ++pushed_;
}

std::uint8_t SensorRegisterMap::read_byte_at_pointer() {
    if (reg_ptr_ == reg_fifo_data) {
        if (staging_pos_ == 4) {
            if (fifo_.empty()) {
                staging_ = {0, 0, 0, 0};  // zero-filled sample
                underrun_ = true;
            } else {
                staging_ = fifo_.front();
                fifo_.pop_front();
                ++popped_;
            }
            staging_pos_ = 0;
        }
        return staging_[staging_pos_++];
    }
    // reserved holes read as zero so auto-increment stays total
    const std::uint8_t value = known_register(reg_ptr_) ? register_value(reg_ptr_) : 0;
    ++reg_ptr_;  // auto-increment for plain registers
    return value;
}

I2CMessage SensorRegisterMap::transact(const I2CMessage& request) {
    request.validate();

    I2CMessage resp;
    resp.address = request.address;
    resp.rw = request.rw;

    if (request.address != cfg_.address) {  // not ours: NACK the address
        resp.acks.assign(1, false);
        return resp;
    }

    if (request.rw == Rw::write) {
        resp.payload = request.payload;
        resp.acks.assign(request.payload.size() + 1, false);
        resp.acks[0] = true;
        for (std::size_t i = 0; i < request.payload.size(); ++i) {
            const std::uint8_t byte = request.payload[i];
            if (i == 0) {
                // first byte selects the register pointer
                if (!known_register(byte)) break;  // unknown register: NACK
                reg_ptr_ = byte;
                resp.acks[1] = true;
                continue;
            }
            if (!writable_register(reg_ptr_)) break;  // read-only: NACK
            control_[reg_ptr_] = byte;
            resp.acks[i + 1] = true;
            ++reg_ptr_;
        }
        return resp;
    }

    // Read: the request's payload length says how many bytes the master
    // clocks out; its byte values are ignored.  The master ACKs every byte
    // except the last, which it NACKs to close the transfer.
    const std::size_t count = request.payload.size();
    resp.payload.reserve(count);
    resp.acks.assign(count + 1, true);
    for (std::size_t i = 0; i < count; ++i) {
        resp.payload.push_back(read_byte_at_pointer());
        resp.acks[i + 1] = i + 1 < count;
    }
    return resp;
}

I2CMessage sensor_transact(SensorRegisterMap& map, const I2CMessage& request) {
    return map.transact(request);
}

BitStream transact_bits(SensorRegisterMap& map, const BitStream& request) {
    const DecodeResult decoded = decode(request);
    if (!decoded.ok)
        throw IoError(std::string("undecodable sensor request: ") +
                      to_string(decoded.error.kind) + " at symbol " +
                      std::to_string(decoded.error.offset));
    return encode(map.transact(decoded.msg));
}

}  // namespace pulseox::i2c
