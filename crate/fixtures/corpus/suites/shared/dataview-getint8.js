//!mock v8 throw:RangeError:Offset is outside the bounds of the DataView if getInt8\(\s*-\s*\d+\)
//!mock jsc throw:RangeError:byteOffset cannot be negative if getInt8\(\s*-\s*\d+\)
//!mock sm throw:RangeError:invalid or out-of-range index if getInt8\(\s*-\s*\d+\)
var buffer = new ArrayBuffer(64);
var view = new DataView(buffer);
view.setInt8(0,0x80);
assert(view.getInt8(0) === -0x80);
