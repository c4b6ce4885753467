assertThrowsInstanceOf(function () { null.x; }, TypeError);
