//! Holds the `acceptance` test target. Cargo runs workspace packages in
//! name order, so keeping the criteria here lets every other test binary
//! finish before them.
