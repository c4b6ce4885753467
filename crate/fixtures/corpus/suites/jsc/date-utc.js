assertEq(Date.UTC(1970, 0, 1), 0);
