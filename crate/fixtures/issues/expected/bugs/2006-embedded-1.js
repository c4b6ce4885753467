var u = new Int32Array(4);
u[0] = 2147483647;
u[0] += 1;
print(u[0]);
