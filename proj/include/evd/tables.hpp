#pragma once
// Interning tables. Hot-path counting is keyed on dense uint32 ids;
// strings only appear at the input and output boundaries.

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "evd/core.hpp"

namespace evd {

using EntityId = uint32_t;
using DomainId = uint32_t;
using AuthorId = uint32_t;

class StringTable {
public:
    uint32_t intern(const std::string& s) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = ids_.find(s);
        if (it != ids_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(values_.size());
        values_.push_back(s);
        ids_.emplace(values_.back(), id);
        return id;
    }

    std::optional<uint32_t> find(const std::string& s) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = ids_.find(s);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    // Valid for the table's lifetime; the deque never reallocates elements.
    const std::string& value(uint32_t id) const {
        std::lock_guard<std::mutex> lock(mu_);
        return values_[id];
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return values_.size();
    }

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, uint32_t> ids_;
    std::deque<std::string> values_;
};

class EntityTable {
public:
    EntityId intern(const Entity& e) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = ids_.find(e);
        if (it != ids_.end()) return it->second;
        EntityId id = static_cast<EntityId>(values_.size());
        values_.push_back(e);
        ids_.emplace(values_.back(), id);
        return id;
    }

    std::optional<EntityId> find(const Entity& e) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = ids_.find(e);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const Entity& entity(EntityId id) const {
        std::lock_guard<std::mutex> lock(mu_);
        return values_[id];
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return values_.size();
    }

private:
    mutable std::mutex mu_;
    std::unordered_map<Entity, EntityId, EntityHash> ids_;
    std::deque<Entity> values_;
};

// Unordered pair of entity ids packed into one map key.
inline uint64_t pair_key(EntityId a, EntityId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | b;
}

inline std::pair<EntityId, EntityId> unpack_pair(uint64_t key) {
    return {static_cast<EntityId>(key >> 32), static_cast<EntityId>(key & 0xffffffffULL)};
}

}  // namespace evd
