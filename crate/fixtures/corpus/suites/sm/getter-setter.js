var o = {
  _v: 0,
  get v() { return this._v; },
  set v(x) { this._v = x * 2; }
};
o.v = 4;
assertEq(o.v, 8);
