#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>

#include "pulseox/codec.hpp"

namespace pulseox::i2c {

// Register-mapped optical front-end in the style of small I2C heart-rate
// sensor modules.  Layout (authoritative for this project):
//
//   0x02  fifo_wr_ptr   RO  samples pushed, mod 32
//   0x03  overflow_cnt  RO  samples dropped on overflow, saturates at 255
//   0x04  fifo_rd_ptr   RO  samples popped, mod 32
//   0x05  fifo_data     R   pops 4-byte samples [IR hi, IR lo, RED hi, RED lo]
//   0x06  mode_config   RW
//   0x07  spo2_config   RW
//   0x09  led_config    RW
//   0xFF  part_id       RO  constant 0x11
//
// A write's first payload byte sets the register pointer; following bytes
// store to consecutive registers.  Reads return consecutive registers
// (reserved holes read as zero), except that the pointer parks on fifo_data,
// which streams whole samples one byte at a time and never tears a sample
// across transactions.
struct SensorConfig {
    std::uint8_t address = 0x57;
    std::size_t fifo_capacity = 32;
};

inline constexpr std::uint8_t reg_fifo_wr_ptr = 0x02;
inline constexpr std::uint8_t reg_overflow_cnt = 0x03;
inline constexpr std::uint8_t reg_fifo_rd_ptr = 0x04;
inline constexpr std::uint8_t reg_fifo_data = 0x05;
inline constexpr std::uint8_t reg_mode_config = 0x06;
inline constexpr std::uint8_t reg_spo2_config = 0x07;
inline constexpr std::uint8_t reg_led_config = 0x09;
inline constexpr std::uint8_t reg_part_id = 0xFF;

class SensorRegisterMap {
  public:
    explicit SensorRegisterMap(SensorConfig cfg = {});

    // Producer side: queue one sample; a full FIFO drops its oldest sample
    // and counts the loss in overflow_cnt.
    void push_sample(std::uint16_t ir, std::uint16_t red);

    // Bus side: answer one decoded message.  The response mirrors the
    // request with the sensor's ack decisions; read responses carry data.
    I2CMessage transact(const I2CMessage& request);

    bool underrun() const { return underrun_; }
    void clear_underrun() { underrun_ = false; }
    std::size_t fifo_depth() const { return fifo_.size(); }
    std::uint8_t register_value(std::uint8_t reg) const;  // throws DomainError
    std::uint8_t address() const { return cfg_.address; }

  private:
    bool known_register(std::uint8_t reg) const;
    bool writable_register(std::uint8_t reg) const;
    std::uint8_t read_byte_at_pointer();

    SensorConfig cfg_;
    std::map<std::uint8_t, std::uint8_t> control_;  // RW registers
    std::deque<std::array<std::uint8_t, 4>> fifo_;
    std::array<std::uint8_t, 4> staging_{};
    std::size_t staging_pos_ = 4;  // 4 = empty
    std::uint64_t pushed_ = 0, popped_ = 0, dropped_ = 0;
    std::uint8_t reg_ptr_ = reg_mode_config;
    bool underrun_ = false;
};

I2CMessage sensor_transact(SensorRegisterMap& map, const I2CMessage& request);

// Symbol-level convenience: decode -> transact -> encode.  Throws IoError
// when the request bit stream does not decode.
BitStream transact_bits(SensorRegisterMap& map, const BitStream& request);

}  // namespace pulseox::i2c
