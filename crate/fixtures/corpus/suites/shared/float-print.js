//!mock sm exit:7
assert(String(0.1 + 0.2) === "0.30000000000000004");
