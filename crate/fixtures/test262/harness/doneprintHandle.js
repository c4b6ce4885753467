function __consolePrintHandle__(msg) {
  print(msg);
}

function $DONE(error) {
  if (error) {
    __consolePrintHandle__("Test262:AsyncTestFailure:" + String(error));
  } else {
    __consolePrintHandle__("Test262:AsyncTestComplete");
  }
}
