#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdspan {

using ElementId = int;
using NodeId = int;

constexpr int kNoMark = -1;
constexpr int kNoParent = -1;

// Raised when a quotient class would carry both colors at once.
class MergeConflictError : public std::runtime_error {
public:
    MergeConflictError(int class_id, std::string what)
        : std::runtime_error(std::move(what)), class_id_(class_id) {}
    int class_id() const { return class_id_; }

private:
    int class_id_;
};

// Raised when a bounded search runs out of its node or time budget.
class ResourceExhausted : public std::runtime_error {
public:
    explicit ResourceExhausted(std::string what) : std::runtime_error(std::move(what)) {}
};

// Raised by file readers; carries a 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(std::string what, long line = 0)
        : std::runtime_error(std::move(what)), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Union-find with path compression and union by size.
class DisjointSet {
public:
    explicit DisjointSet(int n = 0) { reset(n); }

    void reset(int n) {
        parent_.resize(n);
        size_.assign(n, 1);
        for (int i = 0; i < n; ++i) parent_[i] = i;
        components_ = n;
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns true when the two sets were distinct before the call.
    bool merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        --components_;
        return true;
    }

    bool same(int a, int b) { return find(a) == find(b); }
    int components() const { return components_; }
    int size() const { return static_cast<int>(parent_.size()); }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
    int components_ = 0;
};

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace tdspan
