//! Holds the `acceptance` test target. Kept as its own package so it runs
//! after every other test binary in the workspace.
