#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pulseox/config.hpp"
#include "pulseox/estimator.hpp"

namespace pulseox::wire {

// Wire contract: one reading per line, `t,spo2,hr` with one decimal each,
// `--` for an absent heart rate, CRLF line ending, UTF-8/ASCII.  Output is
// throttled to baud/10 bytes per second (8N1 framing: start + 8 data + stop).
struct LinkConfig {
    int baud = 115200;  // one of 9600, 19200, 38400, 57600, 115200
    std::string host = "127.0.0.1";
    int port = 0;       // 0 picks an ephemeral port
    bool realtime = false;  // pace one line per second of readings

    void validate() const;  // throws ConfigError
    static LinkConfig from_config(const Config& cfg);  // link.* keys
    void to_config(Config& cfg) const;
};

std::string format_line(double t_s, double spo2, const std::optional<double>& hr);
std::string format_line(const est::Reading& r);

struct ParsedLine {
    double t_s = 0.0;
    double spo2 = 0.0;
    std::optional<double> hr;
};

// Line without its CRLF; nullopt when the grammar does not match.
std::optional<ParsedLine> parse_line(const std::string& line);

// Reassembles lines from arbitrarily split reads; strips CR before LF.
class LineAssembler {
  public:
    std::vector<std::string> feed(const char* data, std::size_t len);
    const std::string& pending() const { return buf_; }

  private:
    std::string buf_;
};

// Paces writes so the sustained rate never exceeds baud/10 bytes/s.
class Throttle {
  public:
    explicit Throttle(int baud);
    void wait_for(std::size_t bytes);

  private:
    double per_byte_s_;
    bool started_ = false;
    std::chrono::steady_clock::time_point next_;
};

struct ServeStats {
    std::size_t lines = 0;
    std::size_t bytes = 0;
    double wall_s = 0.0;
};

// Writes the whole sequence to a descriptor (pipe or socket), honoring the
// throttle and, when link.realtime, one-second pacing per reading.  Throws
// IoError when the peer goes away.
ServeStats serve_fd(int fd, const std::vector<est::Reading>& readings, const LinkConfig& link);

struct MonitorResult {
    std::vector<ParsedLine> readings;
    std::vector<std::string> malformed;  // raw offending lines, for warnings
};

// Reads until EOF.  csv_sink_path, when non-empty, receives
// `t_s,spo2,hr,recv_unix` rows (hr empty when absent).
MonitorResult monitor_fd(int fd, const std::string& csv_sink_path = "");
MonitorResult monitor_tcp(const std::string& host, int port,
                          const std::string& csv_sink_path = "");

// Serves every connecting client one full copy of the readings, each client
// on its own thread with an isolated throttle, so a dropped client never
// disturbs the others.
class TcpServer {
  public:
    TcpServer(std::vector<est::Reading> readings, LinkConfig link);
    ~TcpServer();

    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    int port() const { return port_; }
    std::size_t sessions_served() const;
    void wait_for_sessions(std::size_t n);
    void stop();

  private:
    void accept_loop();

    std::vector<est::Reading> readings_;
    LinkConfig link_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::thread acceptor_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::vector<std::thread> sessions_;
    std::size_t served_ = 0;
    bool stopping_ = false;
};

}  // namespace pulseox::wire
