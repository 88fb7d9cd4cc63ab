// expect: UnbalancedParens
using UnityEngine;

public class Spinner : MonoBehaviour
{
    private void Update()
    {
        transform.Rotate(0f, 90f * Time.deltaTime, 0f));
    }
}
