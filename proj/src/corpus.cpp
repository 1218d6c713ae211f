#include "chr/corpus.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace chr::corpus {

namespace {

const std::map<std::string, std::string>& table() {
    static const std::map<std::string, std::string> programs = {
        {"min", "min(N) \\ min(M) <=> N =< M | true.\n"},

        {"primes", "sift : prime(I) \\ prime(J) <=> J mod I =:= 0 | true.\n"},

        {"gcd", "gcd(N) \\ gcd(M) <=> 0 < N, N =< M | gcd(M-N).\n"},

        {"merge_sort",
         "msort : A->B \\ A->C <=> A < B, B < C | B->C.\n"
         "merge : N=>A, M=>B <=> A < B | N+M=>A, A->B.\n"},

        {"floyd_warshall",
         "shorten : arc(I,K,D1), arc(K,J,D2) \\ arc(I,J,D3) <=> D3 > D1+D2 | "
         "arc(I,J,D1+D2).\n"},

        {"turing",
         "st(QI,SI,SJ,D,QJ) \\ state(I,QI), cell(I,SI) <=> state(I+D,QJ), "
         "cell(I,SJ).\n"},

        {"blocks_world",
         "grab  : grab(R,X), empty(R), clear(X), on(X,Y) <=> hold(R,X), "
         "clear(Y).\n"
         "putOn : putOn(R,Y), hold(R,X), clear(Y) <=> empty(R), clear(X), "
         "on(X,Y).\n"},

        {"union_find_basic",
         "union    : union(A,B) <=> find(A,fid(A,B,1)), find(B,fid(A,B,2)), "
         "link(fid(A,B,1),fid(A,B,2)).\n"
         "findNode : A->B \\ find(A,X) <=> find(B,X).\n"
         "findRoot : root(A) \\ find(A,X) <=> found(A,X).\n"
         "linkEq   : link(X,Y), found(A,X), found(A,Y) <=> true.\n"
         "linkRoot : link(X,Y), found(A,X), found(B,Y), root(A) \\ root(B) <=> "
         "B->A.\n"},

        {"union_find_parallel",
         "union    : union(A,B) <=> find(A,fid(A,B,1)), find(B,fid(A,B,2)), "
         "link(fid(A,B,1),fid(A,B,2)).\n"
         "findNode : A->B \\ find(A,X) <=> find(B,X).\n"
         "findRoot : root(A) \\ find(A,X) <=> found(A,X).\n"
         "linkEq   : link(X,Y), found(A,X), found(A,Y) <=> true.\n"
         "linkRoot : link(X,Y), found(A,X), found(B,Y), root(A) \\ root(B) <=> "
         "B->A.\n"
         "foundUpdate : A->B \\ found(A,X) <=> found(B,X).\n"},

        {"preflow_push",
         "lift : n(U,N), e(U,E) \\ h(U,_), m(U,M,C)\n"
         "       <=> U \\== source, U \\== sink, 0 < E, C =:= N+E | h(U,M+1).\n"
         "up   : h(U,HU), h(V,HV) \\ r(U,V,K)\n"
         "       <=> HU =< HV, K < HU | m(U,HV,1), r(U,V,HU).\n"
         "push : h(U,HU), h(V,HV) \\ e(U,EU), e(V,EV), r(U,V,_)\n"
         "       <=> 0 < EU, HV < HU | e(U,EU-1), e(V,EV+1), m(V,HU,1), "
         "r(V,U,HV).\n"
         "min  : m(U,M1,C1), m(U,M2,C2) <=> m(U,min(M1,M2),C1+C2).\n"},

        {"sat_mp",
         "generate : f([X|Xs], A) <=> f(Xs,[t(X)|A]), f(Xs,[f(X)|A]).\n"
         "assignT  : f([],A) \\ eq(T,v(X)) <=> t(X) in A | sat(T,A,1).\n"
         "assignF  : f([],A) \\ eq(T,v(X)) <=> f(X) in A | sat(T,A,0).\n"
         "negR : sat(T1,A,S) \\ eq(T,neg(T1)) <=> sat(T,A,1-S).\n"
         "andR : sat(T1,A,S1), sat(T2,A,S2) \\ eq(T,and(T1,T2)) <=> "
         "sat(T,A,min(S1,S2)).\n"
         "orR  : sat(T1,A,S1), sat(T2,A,S2) \\ eq(T,or(T1,T2)) <=> "
         "sat(T,A,max(S1,S2)).\n"},

        {"bank_chrt",
         "#dialect chrt.\n"
         "#data balance/2.\n"
         "#operation deposit/2.\n"
         "#operation withdraw/2.\n"
         "#operation transfer/3.\n"
         "dep : balance(Acc,Bal), deposit(Acc,Amt) <=> balance(Acc,Bal+Amt).\n"
         "wdr : balance(Acc,Bal), withdraw(Acc,Amt) <=> Bal > Amt | "
         "balance(Acc,Bal-Amt).\n"
         "trf : transfer(Acc1,Acc2,Amt) <=> withdraw(Acc1,Amt), "
         "deposit(Acc2,Amt).\n"},

        {"stm_cells",
         "#dialect chrt.\n"
         "#data cell/2.\n"
         "#data wlog/3.\n"
         "#data commitright/0.\n"
         "#operation read/2.\n"
         "#operation write/2.\n"
         "#operation write/3.\n"
         "#operation commit/1.\n"
         "read  : cell(L,V1) \\ read(L,V2) <=> V1 = V2.\n"
         "write : cell(L,V1), write(L,V2) <=> cell(L,V2).\n"
         "w1 : wlog(T,L,V1), write(T,L,V2) <=> wlog(T,L,V2).\n"
         "w2 : write(T,L,V) <=> wlog(T,L,V).\n"
         "c2 : commit(T) <=> commitright.\n"},

        {"fw_distributed",
         "#dialect chre.\n"
         "base  : [X]arc(Y,D) ==> [X]path(Y,D).\n"
         "elim  : [X]path(Y,D1) \\ [X]path(Y,D2) <=> D1 < D2 | true.\n"
         "trans : [X]arc(Y,D1), [Y]path(Z,D2) ==> X \\== Z | "
         "[X]path(Z,D1+D2).\n"},
    };
    return programs;
}

} // namespace

std::optional<std::string> source(const std::string& name) {
    if (name == "philosophers")
        return philosophers_source(3);
    auto it = table().find(name);
    if (it == table().end())
        return std::nullopt;
    return it->second;
}

std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : table())
        out.push_back(name);
    out.push_back("philosophers");
    return out;
}

std::string philosophers_source(int n) {
    std::ostringstream os;
    os << "#const n = " << n << ".\n"
       << "think_eat : think(X,T), fork(X), fork(Y) <=> 0 < T, Y =:= (X+1) mod "
          "n | eat(X,T).\n"
       << "eat_think : eat(X,T) <=> Y =:= (X+1) mod n | think(X,T-1), fork(X), "
          "fork(Y).\n";
    return os.str();
}

std::string primes_goal(int n) {
    std::ostringstream os;
    for (int i = 2; i <= n; ++i) {
        if (i > 2)
            os << ", ";
        os << "prime(" << i << ")";
    }
    return os.str();
}

std::string gcd_goal(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(1, 200);
    int base = 2 + static_cast<int>(rng() % 11);
    std::ostringstream os;
    for (int i = 0; i < count; ++i) {
        if (i)
            os << ", ";
        os << "gcd(" << base * dist(rng) << ")";
    }
    return os.str();
}

std::string philosophers_goal(int n, int meals) {
    std::ostringstream os;
    for (int i = 0; i < n; ++i) {
        if (i)
            os << ", ";
        os << "think(" << i << "," << meals << "), fork(" << i << ")";
    }
    return os.str();
}

std::string fw_cycle_goal(int n, bool localized) {
    std::ostringstream os;
    auto node = [](int i) {
        std::string name;
        int v = i;
        name.push_back(static_cast<char>('a' + v % 26));
        if (v >= 26)
            name += std::to_string(v / 26);
        return name;
    };
    bool first = true;
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        if (!first)
            os << ", ";
        first = false;
        if (localized) {
            os << "[" << node(i) << "]arc(" << node(j) << ",1)";
        } else {
            os << "arc(" << node(i) << "," << node(j) << ",1)";
        }
    }
    if (!localized) {
        // Seed the remaining ordered pairs above any possible distance.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j || j == (i + 1) % n)
                    continue;
                os << ", arc(" << node(i) << "," << node(j) << "," << n + 1
                   << ")";
            }
    }
    return os.str();
}

std::string merge_sort_goal(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> values;
    // Distinct values; the msort guard orders strictly.
    while (static_cast<int>(values.size()) < count) {
        int v = 1 + static_cast<int>(rng() % (count * 10));
        if (std::find(values.begin(), values.end(), v) == values.end())
            values.push_back(v);
    }
    std::ostringstream os;
    for (int i = 0; i < count; ++i) {
        if (i)
            os << ", ";
        os << "1=>" << values[i];
    }
    return os.str();
}

std::string expand_goal(const std::string& spec, std::uint64_t seed) {
    if (spec.rfind("gen:", 0) != 0)
        return spec;
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(4));
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(item);
    if (parts.empty())
        throw std::invalid_argument("empty goal generator");
    const std::string& kind = parts[0];
    auto arg = [&parts](std::size_t i, int fallback) {
        return i < parts.size() ? std::stoi(parts[i]) : fallback;
    };
    if (kind == "primes")
        return primes_goal(arg(1, 30));
    if (kind == "gcd")
        return gcd_goal(arg(1, 3), parts.size() > 2 ? std::stoull(parts[2]) : seed);
    if (kind == "philosophers")
        return philosophers_goal(arg(1, 3), arg(2, 2));
    if (kind == "fw")
        return fw_cycle_goal(arg(1, 4), false);
    if (kind == "fwd")
        return fw_cycle_goal(arg(1, 4), true);
    if (kind == "msort")
        return merge_sort_goal(arg(1, 8), parts.size() > 2 ? std::stoull(parts[2]) : seed);
    throw std::invalid_argument("unknown goal generator '" + kind + "'");
}

} // namespace chr::corpus
