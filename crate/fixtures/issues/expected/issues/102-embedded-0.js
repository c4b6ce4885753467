var buffer = new ArrayBuffer(64);
var view = new DataView(buffer);
view.setInt8(0, 0x80);
print(view.getInt8(-1));
