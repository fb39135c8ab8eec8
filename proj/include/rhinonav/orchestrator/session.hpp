#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rhinonav/orchestrator/protocol.hpp"
#include "rhinonav/orchestrator/simulation.hpp"

namespace rhinonav {

using ClientId = std::uint64_t;

enum class Role { operator_role, observer };

inline std::string_view role_name(Role r) {
  return r == Role::operator_role ? "operator" : "observer";
}

struct Outgoing {
  ClientId to;
  std::string text;
};

// Per-client send queue with a fixed capacity. When full, the oldest message
// not yet on the wire is dropped so a slow client always sees recent state.
class Outbox {
 public:
  explicit Outbox(std::size_t capacity) : capacity_(capacity < 2 ? 2 : capacity) {}

  // Returns true when a message had to be dropped.
  bool push(std::string text) {
    bool dropped = false;
    if (queue_.size() >= capacity_) {
      queue_.erase(queue_.begin() + (in_flight_ ? 1 : 0));
      dropped = true;
    }
    queue_.push_back(std::move(text));
    return dropped;
  }

  bool empty() const { return queue_.empty(); }
  std::size_t size() const { return queue_.size(); }
  bool in_flight() const { return in_flight_; }

  // Marks the front message as being written and returns it.
  const std::string& begin_write() {
    in_flight_ = true;
    return queue_.front();
  }

  void finish_write() {
    queue_.pop_front();
    in_flight_ = false;
  }

 private:
  std::size_t capacity_;
  std::deque<std::string> queue_;
  bool in_flight_ = false;
};

// An operator command waiting for the simulation loop.
struct PendingCommand {
  ClientId from;
  ClientMessage message;
};

// Role registry and message routing, independent of the transport. At most one
// client holds the operator role; only its commands reach the simulation.
// Thread-safe: connection handlers and the simulation loop may call in
// concurrently.
class SessionHub {
 public:
  explicit SessionHub(GridMap map) : map_(std::move(map)) {}

  ClientId connect() {
    std::lock_guard lock(mutex_);
    const ClientId id = next_id_++;
    clients_[id] = std::nullopt;
    return id;
  }

  void disconnect(ClientId id) {
    std::lock_guard lock(mutex_);
    clients_.erase(id);
    if (operator_ == id) {
      operator_.reset();
    }
  }

  // Replies to send immediately; accepted commands are queued.
  std::vector<Outgoing> handle(ClientId id, std::string_view text) {
    std::lock_guard lock(mutex_);
    if (!clients_.contains(id)) {
      return {};
    }
    ClientMessage msg;
    try {
      msg = parse_client_message(text);
    } catch (const ProtocolError& e) {
      return {{id, error_message(e.code(), e.what())}};
    }
    if (const auto* hello = std::get_if<HelloMessage>(&msg)) {
      return hello_locked(id, hello->role);
    }
    const auto& role = clients_[id];
    if (!role) {
      return {{id, error_message("no_role", "send hello first")}};
    }
    if (*role != Role::operator_role) {
      return {{id, error_message("observer_role", "observer role")}};
    }
    pending_.push_back({id, std::move(msg)});
    return {};
  }

  std::vector<PendingCommand> drain() {
    std::lock_guard lock(mutex_);
    std::vector<PendingCommand> out;
    out.swap(pending_);
    return out;
  }

  // Clients that completed the handshake.
  std::vector<ClientId> subscribers() const {
    std::lock_guard lock(mutex_);
    std::vector<ClientId> out;
    for (const auto& [id, role] : clients_) {
      if (role) {
        out.push_back(id);
      }
    }
    return out;
  }

  std::optional<Role> role_of(ClientId id) const {
    std::lock_guard lock(mutex_);
    const auto it = clients_.find(id);
    return it == clients_.end() ? std::nullopt : it->second;
  }

  std::optional<ClientId> operator_client() const {
    std::lock_guard lock(mutex_);
    return operator_;
  }

 private:
  std::vector<Outgoing> hello_locked(ClientId id, const std::string& requested) {
    auto& role = clients_[id];
    if (requested == "operator") {
      if (operator_ && *operator_ != id) {
        return {{id, error_message("operator_taken", "operator taken")}};
      }
      operator_ = id;
      role = Role::operator_role;
    } else {
      if (operator_ == id) {
        operator_.reset();
      }
      role = Role::observer;
    }
    return {{id, welcome_message(role_name(*role), map_)}};
  }

  GridMap map_;
  mutable std::mutex mutex_;
  std::map<ClientId, std::optional<Role>> clients_;
  std::optional<ClientId> operator_;
  std::vector<PendingCommand> pending_;
  ClientId next_id_ = 1;
};

// Applies one operator command; returns an error reply for rejected goals.
inline std::optional<Outgoing> apply_command(Simulation& sim, bool& paused,
                                             const PendingCommand& cmd) {
  if (const auto* g = std::get_if<SetGoalMessage>(&cmd.message)) {
    const GoalResult r = sim.set_goal({g->x, g->y});
    if (const auto* rej = std::get_if<GoalRejected>(&r)) {
      return Outgoing{cmd.from, error_message("goal_rejected", rej->reason)};
    }
  } else if (std::holds_alternative<ResetMessage>(cmd.message)) {
    sim.reset();
  } else if (std::holds_alternative<PauseMessage>(cmd.message)) {
    paused = true;
  } else if (std::holds_alternative<ResumeMessage>(cmd.message)) {
    paused = false;
  }
  return std::nullopt;
}

}  // namespace rhinonav
