#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "rhinonav/orchestrator/protocol.hpp"
#include "rhinonav/orchestrator/session.hpp"
#include "rhinonav/orchestrator/simulation.hpp"

namespace rhinonav {

struct ServerOptions {
  std::string bind = "127.0.0.1:8080";  // host:port; port 0 picks a free one
  std::filesystem::path static_dir;     // UI files served over plain HTTP
  bool debug_truth = false;             // include the true pose in snapshots
  std::size_t outbox_capacity = 8;
};

namespace detail {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

inline tcp::endpoint parse_endpoint(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::invalid_argument, "bind address must be host:port");
  }
  const long long port = parse_integer(std::string_view(bind).substr(colon + 1), 0);
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::invalid_argument, "port out of range");
  }
  return {net::ip::make_address(bind.substr(0, colon)), static_cast<unsigned short>(port)};
}

inline std::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace detail

// WebSocket front end for one simulation. Network I/O runs on one background
// thread; the simulation runs on the thread that calls run(), paced at the
// configured tick rate, and is only ever touched from there.
class Server {
  class WsSession;
  class HttpSession;

 public:
  Server(SimConfig cfg, ServerOptions opts, std::ostream& log)
      : opts_(std::move(opts)), log_(log), sim_(Simulation::from_config(cfg)), hub_(sim_.map()),
        acceptor_(ioc_, detail::parse_endpoint(opts_.bind)) {}

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  // Blocks until stop() is called.
  void run() {
    do_accept();
    std::thread io([this] { ioc_.run(); });
    log_ << "listening on " << acceptor_.local_endpoint() << "\n";
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(sim_.config().dt()));
    auto next = clock::now();
    bool paused = false;
    while (!stopping_) {
      next += period;
      for (const PendingCommand& cmd : hub_.drain()) {
        if (auto reply = apply_command(sim_, paused, cmd)) {
          post_to(reply->to, std::move(reply->text));
        }
      }
      if (!paused) {
        const Snapshot snap = sim_.step();
        for (const std::string& w : snap.warnings) {
          log_ << "tick " << snap.tick << ": " << w << "\n";
        }
        broadcast(snapshot_message(snap, opts_.debug_truth));
      }
      const auto now = clock::now();
      if (now > next + period) {
        next = now;  // fell behind; don't try to catch up
      }
      std::this_thread::sleep_until(next);
    }
    detail::net::post(ioc_, [this] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      for (auto& [id, weak] : sessions_) {
        if (auto s = weak.lock()) {
          s->close();
        }
      }
    });
    work_.reset();
    io.join();
  }

  void stop() {
    stopping_ = true;
    ioc_.stop();  // unblocks run() after the current tick
  }

 private:
  using tcp = detail::tcp;

  void do_accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) {
        return;
      }
      std::make_shared<HttpSession>(*this, std::move(socket))->run();
      do_accept();
    });
  }

  void post_to(ClientId id, std::string text) {
    detail::net::post(ioc_, [this, id, text = std::move(text)]() mutable {
      const auto it = sessions_.find(id);
      if (it != sessions_.end()) {
        if (auto s = it->second.lock()) {
          s->send(std::move(text));
        }
      }
    });
  }

  void broadcast(std::string text) {
    detail::net::post(ioc_, [this, text = std::move(text)] {
      for (ClientId id : hub_.subscribers()) {
        const auto it = sessions_.find(id);
        if (it != sessions_.end()) {
          if (auto s = it->second.lock()) {
            s->send(text);
          }
        }
      }
    });
  }

  class WsSession : public std::enable_shared_from_this<WsSession> {
   public:
    WsSession(Server& server, tcp::socket socket)
        : server_(server), ws_(std::move(socket)), outbox_(server.opts_.outbox_capacity) {}

    template <class Request>
    void run(Request req) {
      namespace websocket = detail::websocket;
      ws_.set_option(websocket::stream_base::timeout::suggested(detail::beast::role_type::server));
      ws_.async_accept(req, [self = shared_from_this()](boost::system::error_code ec) {
        if (ec) {
          return;
        }
        self->id_ = self->server_.hub_.connect();
        self->server_.sessions_[self->id_] = self->weak_from_this();
        self->do_read();
      });
    }

    void send(std::string text) {
      if (closed_) {
        return;
      }
      outbox_.push(std::move(text));
      if (!outbox_.in_flight()) {
        do_write();
      }
    }

    void close() {
      if (closed_) {
        return;
      }
      closed_ = true;
      server_.hub_.disconnect(id_);
      server_.sessions_.erase(id_);
      boost::system::error_code ec;
      ws_.next_layer().socket().close(ec);
    }

   private:
    void do_read() {
      ws_.async_read(buffer_, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
        if (ec) {
          self->close();
          return;
        }
        const std::string text = detail::beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        for (Outgoing& reply : self->server_.hub_.handle(self->id_, text)) {
          self->send(std::move(reply.text));
        }
        self->do_read();
      });
    }

    void do_write() {
      const std::string& text = outbox_.begin_write();
      ws_.text(true);
      ws_.async_write(detail::net::buffer(text),
                      [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                        self->outbox_.finish_write();
                        if (ec) {
                          self->close();
                          return;
                        }
                        if (!self->outbox_.empty()) {
                          self->do_write();
                        }
                      });
    }

    Server& server_;
    detail::websocket::stream<detail::beast::tcp_stream> ws_;
    detail::beast::flat_buffer buffer_;
    Outbox outbox_;
    ClientId id_ = 0;
    bool closed_ = false;
  };

  // Reads one request: WebSocket upgrades are handed over, anything else is
  // answered from the static directory.
  class HttpSession : public std::enable_shared_from_this<HttpSession> {
   public:
    HttpSession(Server& server, tcp::socket socket) : server_(server), stream_(std::move(socket)) {}

    void run() {
      stream_.expires_after(std::chrono::seconds(30));
      detail::http::async_read(stream_, buffer_, req_,
                               [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                                 if (!ec) {
                                   self->on_request();
                                 }
                               });
    }

   private:
    void on_request() {
      namespace http = detail::http;
      if (detail::websocket::is_upgrade(req_)) {
        stream_.expires_never();
        std::make_shared<WsSession>(server_, stream_.release_socket())->run(std::move(req_));
        return;
      }
      auto res = std::make_shared<http::response<http::string_body>>(respond());
      http::async_write(stream_, *res,
                        [self = shared_from_this(), res](boost::system::error_code, std::size_t) {
                          boost::system::error_code ec;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                        });
    }

    detail::http::response<detail::http::string_body> respond() const {
      namespace http = detail::http;
      http::response<http::string_body> res{http::status::not_found, req_.version()};
      res.set(http::field::content_type, "text/plain");
      res.body() = "not found\n";
      const std::string target(req_.target());
      const auto& root = server_.opts_.static_dir;
      if (req_.method() == http::verb::get && !root.empty() &&
          target.find("..") == std::string::npos && !target.empty() && target[0] == '/') {
        std::filesystem::path file = root / target.substr(1, target.find('?') - 1);
        if (std::filesystem::is_directory(file)) {
          file /= "index.html";
        }
        std::ifstream in(file, std::ios::binary);
        if (in) {
          std::ostringstream body;
          body << in.rdbuf();
          res.result(http::status::ok);
          res.set(http::field::content_type, std::string(detail::mime_type(file)));
          res.body() = body.str();
        }
      }
      res.prepare_payload();
      return res;
    }

    Server& server_;
    detail::beast::tcp_stream stream_;
    detail::beast::flat_buffer buffer_;
    detail::http::request<detail::http::string_body> req_;
  };

  ServerOptions opts_;
  std::ostream& log_;
  Simulation sim_;
  SessionHub hub_;
  detail::net::io_context ioc_;
  detail::net::executor_work_guard<detail::net::io_context::executor_type> work_ =
      detail::net::make_work_guard(ioc_);
  tcp::acceptor acceptor_;
  std::map<ClientId, std::weak_ptr<WsSession>> sessions_;  // io thread only
  std::atomic<bool> stopping_ = false;
};

inline int serve_forever(const SimConfig& cfg, const ServerOptions& opts, std::ostream& log) {
  Server server(cfg, opts, log);
  server.run();
  return 0;
}

}  // namespace rhinonav
