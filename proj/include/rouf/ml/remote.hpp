#pragma once

#include <rouf/error.hpp>
#include <rouf/ml/classifier.hpp>

#include <json.hpp>

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace rouf::ml {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Classifier served over TCP with newline-delimited JSON:
///   request  {"id": u64, "features": [...]}
///   response {"id": u64, "label": 0|1, "score": s}  or  {"id": u64, "error": "..."}
/// The connection is opened lazily and dropped after any transport error.
class RemoteClassifier final : public Classifier {
 public:
  RemoteClassifier(Endpoint endpoint, std::size_t arity, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), arity_(arity), timeout_(timeout) {
    if (arity_ == 0) throw ConfigError("classifier arity must be >= 1");
    if (timeout_.count() <= 0) throw ConfigError("remote timeout must be positive");
  }

  RemoteClassifier(const RemoteClassifier&) = delete;
  RemoteClassifier& operator=(const RemoteClassifier&) = delete;
  ~RemoteClassifier() override { disconnect(); }

  std::size_t arity() const override { return arity_; }
  const Endpoint& endpoint() const noexcept { return endpoint_; }
  std::chrono::milliseconds timeout() const noexcept { return timeout_; }

  Verdict classify(std::span<const double> x) const override {
    check_arity(x);
    std::lock_guard lock(mu_);
    try {
      ensure_connected();
      const std::uint64_t id = next_id_++;
      send_all(request_line(id, x));
      auto [rid, v] = read_reply();
      if (rid != id) {
        throw TransportError("reply id " + std::to_string(rid) + " does not match request id " + std::to_string(id));
      }
      return v;
    } catch (const TransportError&) {
      disconnect();
      throw;
    }
  }

  /// Pipelines requests in chunks; replies may arrive in any order and are matched by id.
  std::vector<Verdict> classify_batch(std::span<const FeatureVector> xs) const override {
    for (const auto& x : xs) check_arity(x);
    std::vector<Verdict> out(xs.size());
    std::lock_guard lock(mu_);
    std::size_t base = 0;
    try {
      ensure_connected();
      for (; base < xs.size(); base += kChunk) {
        const std::size_t count = std::min(kChunk, xs.size() - base);
        std::unordered_map<std::uint64_t, std::size_t> pending;
        std::string payload;
        for (std::size_t i = 0; i < count; ++i) {
          const std::uint64_t id = next_id_++;
          pending.emplace(id, base + i);
          payload += request_line(id, xs[base + i]);
        }
        send_all(payload);
        for (std::size_t i = 0; i < count; ++i) {
          auto [rid, v] = read_reply(&pending);
          auto it = pending.find(rid);
          if (it == pending.end()) throw TransportError("reply carries unknown id " + std::to_string(rid));
          out[it->second] = v;
          pending.erase(it);
        }
      }
    } catch (const IndexedError<TransportError>&) {
      disconnect();
      throw;
    } catch (const TransportError& e) {
      disconnect();
      throw IndexedError<TransportError>(e, base);
    }
    return out;
  }

 private:
  static constexpr std::size_t kChunk = 64;

  static std::string request_line(std::uint64_t id, std::span<const double> x) {
    nlohmann::json j{{"id", id}, {"features", std::vector<double>(x.begin(), x.end())}};
    return j.dump() + "\n";
  }

  void ensure_connected() const {
    if (fd_ >= 0) return;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(endpoint_.port);
    if (int rc = ::getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw TransportError("cannot resolve " + endpoint_.str() + ": " + ::gai_strerror(rc));
    }
    std::string last = "no addresses";
    for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
      const int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
      if (fd < 0) continue;
      const int flags = ::fcntl(fd, F_GETFL, 0);
      ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
      int rc = ::connect(fd, a->ai_addr, a->ai_addrlen);
      if (rc < 0 && errno == EINPROGRESS) {
        pollfd p{fd, POLLOUT, 0};
        rc = ::poll(&p, 1, static_cast<int>(timeout_.count()));
        if (rc == 0) {
          last = "connect timed out";
          ::close(fd);
          continue;
        }
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
        errno = err;
      }
      if (rc == 0) {
        fd_ = fd;
        break;
      }
      last = std::strerror(errno);
      ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw TransportError("cannot connect to " + endpoint_.str() + ": " + last);
    buffer_.clear();
  }

  void disconnect() const {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    buffer_.clear();
  }

  int remaining_ms(std::chrono::steady_clock::time_point deadline) const {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    return static_cast<int>(std::max<std::int64_t>(0, left.count()));
  }

  void send_all(const std::string& data) const {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n > 0) {
        off += static_cast<std::size_t>(n);
        continue;
      }
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        throw TransportError(std::string("send failed: ") + std::strerror(errno));
      }
      pollfd p{fd_, POLLOUT, 0};
      if (::poll(&p, 1, remaining_ms(deadline)) <= 0) throw TransportError("send timed out");
    }
  }

  std::string read_line() const {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      pollfd p{fd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc == 0) throw TransportError("timed out after " + std::to_string(timeout_.count()) + " ms waiting for a reply");
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("poll failed: ") + std::strerror(errno));
      }
      char buf[4096];
      const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
      if (n == 0) throw TransportError("server closed the connection");
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
        throw TransportError(std::string("recv failed: ") + std::strerror(errno));
      }
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

  std::pair<std::uint64_t, Verdict> read_reply(const std::unordered_map<std::uint64_t, std::size_t>* pending = nullptr) const {
    const std::string line = read_line();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw TransportError("malformed reply: not JSON");
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_unsigned()) {
      throw TransportError("malformed reply: missing unsigned 'id'");
    }
    const auto id = j["id"].get<std::uint64_t>();
    if (j.contains("error")) {
      std::string msg = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
      Error inner("server error for id " + std::to_string(id) + ": " + msg);
      if (pending) {
        if (auto it = pending->find(id); it != pending->end()) throw IndexedError<TransportError>(TransportError(inner.what()), it->second);
      }
      throw TransportError(inner.what());
    }
    if (!j.contains("label") || !j["label"].is_number_integer()) throw TransportError("malformed reply: missing integer 'label'");
    const auto label = j["label"].get<std::int64_t>();
    if (label != 0 && label != 1) throw TransportError("malformed reply: label must be 0 or 1");
    if (!j.contains("score") || !j["score"].is_number()) throw TransportError("malformed reply: missing numeric 'score'");
    const double score = j["score"].get<double>();
    if (!(score >= 0 && score <= 1)) throw TransportError("malformed reply: score outside [0,1]");
    return {id, Verdict{static_cast<int>(label), score}};
  }

  Endpoint endpoint_;
  std::size_t arity_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  mutable int fd_ = -1;
  mutable std::string buffer_;
  mutable std::uint64_t next_id_ = 1;
};

}  // namespace rouf::ml
