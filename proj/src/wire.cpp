#include "pulseox/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <cmath>
#include <fstream>

#include "pulseox/errors.hpp"

namespace pulseox::wire {

namespace {

constexpr int allowed_bauds[] = {9600, 19200, 38400, 57600, 115200};

void ignore_sigpipe() {
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

// Writes the full buffer; prefers send(MSG_NOSIGNAL) so a vanished peer
// surfaces as EPIPE instead of a signal, falling back to write for pipes.
void write_all(int fd, const char* p, std::size_t n) {
    bool is_socket = true;
    while (n > 0) {
        ssize_t w;
        if (is_socket) {
            w = ::send(fd, p, n, MSG_NOSIGNAL);
            if (w < 0 && errno == ENOTSOCK) {
                is_socket = false;
                continue;
            }
        } else {
            w = ::write(fd, p, n);
        }
        if (w < 0) {
            if (errno == EINTR) continue;
            throw IoError(std::string("wire write failed: ") + std::strerror(errno));
        }
        p += w;
        n -= static_cast<std::size_t>(w);
    }
}

bool parse_number(const std::string& field, double* out) {
    if (field.empty()) return false;
    const char* s = field.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s, &end);
    if (errno != 0 || end != s + field.size() || !std::isfinite(v)) return false;
    *out = v;
    return true;
}

}  // namespace

void LinkConfig::validate() const {
    bool ok = false;
    for (int b : allowed_bauds) ok = ok || (b == baud);
    if (!ok) throw ConfigError("link.baud must be one of 9600, 19200, 38400, 57600, 115200");
    if (port < 0 || port > 65535) throw ConfigError("link.port must be in [0, 65535]");
    if (host.empty()) throw ConfigError("link.host must be non-empty");
}

LinkConfig LinkConfig::from_config(const Config& cfg) {
    LinkConfig link;
    link.baud = static_cast<int>(cfg.get_int("link.baud", link.baud));
    link.host = cfg.get_string("link.host", link.host);
    link.port = static_cast<int>(cfg.get_int("link.port", link.port));
    link.realtime = cfg.get_bool("link.realtime", link.realtime);
    link.validate();
    return link;
}

void LinkConfig::to_config(Config& cfg) const {
    cfg.set_real("link.baud", baud);
    cfg.set("link.host", host);
    cfg.set_real("link.port", port);
    cfg.set("link.realtime", realtime ? "true" : "false");
}

std::string format_line(double t_s, double spo2, const std::optional<double>& hr) {
    char buf[80];
    int n;
    if (hr.has_value()) {
        n = std::snprintf(buf, sizeof buf, "%.1f,%.1f,%.1f\r\n", t_s, spo2, *hr);
    } else {
        n = std::snprintf(buf, sizeof buf, "%.1f,%.1f,--\r\n", t_s, spo2);
    }
    return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_line(const est::Reading& r) {
    return format_line(r.t_s, r.spo2_percent, r.hr_bpm);
}

std::optional<ParsedLine> parse_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (fields.size() != 3) return std::nullopt;
    ParsedLine p;
    if (!parse_number(fields[0], &p.t_s)) return std::nullopt;
    if (!parse_number(fields[1], &p.spo2)) return std::nullopt;
    if (fields[2] != "--") {
        double hr = 0.0;
        if (!parse_number(fields[2], &hr)) return std::nullopt;
        p.hr = hr;
    }
    return p;
}

std::vector<std::string> LineAssembler::feed(const char* data, std::size_t len) {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < len; ++i) {
        char c = data[i];
        if (c == '\n') {
            if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
            lines.push_back(buf_);
            buf_.clear();
        } else {
            buf_.push_back(c);
        }
    }
    return lines;
}

Throttle::Throttle(int baud) : per_byte_s_(10.0 / baud) {}

void Throttle::wait_for(std::size_t bytes) {
    auto now = std::chrono::steady_clock::now();
    if (!started_) {
        started_ = true;
        next_ = now;
    }
    if (next_ > now) std::this_thread::sleep_until(next_);
    next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(per_byte_s_ * static_cast<double>(bytes)));
}

ServeStats serve_fd(int fd, const std::vector<est::Reading>& readings, const LinkConfig& link) {
    link.validate();
    ignore_sigpipe();
    Throttle throttle(link.baud);
    ServeStats stats;
    auto t0 = std::chrono::steady_clock::now();
    for (const est::Reading& r : readings) {
        std::string line = format_line(r);
        throttle.wait_for(line.size());
        write_all(fd, line.data(), line.size());
        stats.lines += 1;
        stats.bytes += line.size();
        if (link.realtime) std::this_thread::sleep_for(std::chrono::seconds(1));
    }
    stats.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

MonitorResult monitor_fd(int fd, const std::string& csv_sink_path) {
    MonitorResult result;
    std::ofstream sink;
    if (!csv_sink_path.empty()) {
        sink.open(csv_sink_path);
        if (!sink) throw IoError("cannot open sink file: " + csv_sink_path);
        sink << "t_s,spo2,hr,recv_unix\n";
    }
    LineAssembler assembler;
    char buf[4096];
    auto handle = [&](const std::string& line) {
        auto parsed = parse_line(line);
        if (!parsed) {
            result.malformed.push_back(line);
            return;
        }
        result.readings.push_back(*parsed);
        if (sink.is_open()) {
            double recv_unix = std::chrono::duration<double>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count();
            char row[128];
            if (parsed->hr.has_value()) {
                std::snprintf(row, sizeof row, "%.1f,%.1f,%.1f,%.3f\n", parsed->t_s,
                              parsed->spo2, *parsed->hr, recv_unix);
            } else {
                std::snprintf(row, sizeof row, "%.1f,%.1f,,%.3f\n", parsed->t_s,
                              parsed->spo2, recv_unix);
            }
            sink << row;
        }
    };
    while (true) {
        ssize_t n = ::read(fd, buf, sizeof buf);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(std::string("wire read failed: ") + std::strerror(errno));
        }
        if (n == 0) break;
        for (const std::string& line : assembler.feed(buf, static_cast<std::size_t>(n))) {
            handle(line);
        }
    }
    // A stream that stops mid-line was cut off; surface the fragment.
    if (!assembler.pending().empty()) result.malformed.push_back(assembler.pending());
    return result;
}

MonitorResult monitor_tcp(const std::string& host, int port, const std::string& csv_sink_path) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw IoError("bad host address: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        int err = errno;
        ::close(fd);
        throw IoError("connect " + host + ":" + std::to_string(port) + ": " +
                      std::strerror(err));
    }
    try {
        MonitorResult result = monitor_fd(fd, csv_sink_path);
        ::close(fd);
        return result;
    } catch (...) {
        ::close(fd);
        throw;
    }
}

TcpServer::TcpServer(std::vector<est::Reading> readings, LinkConfig link)
    : readings_(std::move(readings)), link_(std::move(link)) {
    link_.validate();
    ignore_sigpipe();
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(link_.port));
    if (::inet_pton(AF_INET, link_.host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw IoError("bad host address: " + link_.host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 16) != 0) {
        int err = errno;
        ::close(listen_fd_);
        throw IoError("bind/listen " + link_.host + ":" + std::to_string(link_.port) +
                      ": " + std::strerror(err));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::accept_loop() {
    while (true) {
        int cfd = ::accept(listen_fd_, nullptr, nullptr);
        if (cfd < 0) {
            if (errno == EINTR || errno == ECONNABORTED) {
                std::lock_guard<std::mutex> lk(mu_);
                if (stopping_) break;
                continue;
            }
            break;  // listen socket closed
        }
        std::lock_guard<std::mutex> lk(mu_);
        if (stopping_) {
            ::close(cfd);
            break;
        }
        sessions_.emplace_back([this, cfd] {
            try {
                serve_fd(cfd, readings_, link_);
            } catch (const IoError&) {
                // client went away; other sessions are unaffected
            }
            ::close(cfd);
            {
                std::lock_guard<std::mutex> lk2(mu_);
                served_ += 1;
            }
            cv_.notify_all();
        });
    }
}

std::size_t TcpServer::sessions_served() const {
    std::lock_guard<std::mutex> lk(mu_);
    return served_;
}

void TcpServer::wait_for_sessions(std::size_t n) {
    std::unique_lock<std::mutex> lk(mu_);
    cv_.wait(lk, [&] { return served_ >= n || stopping_; });
}

void TcpServer::stop() {
    {
        std::lock_guard<std::mutex> lk(mu_);
        if (stopping_ && listen_fd_ < 0) return;
        stopping_ = true;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
    }
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> sessions;
    {
        std::lock_guard<std::mutex> lk(mu_);
        sessions.swap(sessions_);
        listen_fd_ = -1;
    }
    for (std::thread& t : sessions) {
        if (t.joinable()) t.join();
    }
    cv_.notify_all();
}

}  // namespace pulseox::wire
